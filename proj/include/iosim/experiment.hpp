#ifndef IOSIM_EXPERIMENT_HPP
#define IOSIM_EXPERIMENT_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "iosim/modes.hpp"
#include "iosim/types.hpp"

namespace iosim {

enum class SweepAxis { SinrTarget, NElements, PowerBudget, UserRatio };

std::string to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

/// One Monte-Carlo sweep. Numeric axis values are in presentation units
/// (SINR targets in dB, budgets in dBW); the harness converts to linear
/// when instantiating per-point configs. user_ratio points are (k_r, k_t).
struct ExperimentSpec {
  Problem problem = Problem::PowerMin;
  SweepAxis axis = SweepAxis::SinrTarget;
  std::vector<double> values;
  std::vector<std::pair<int, int>> ratio_values;
  int trials = 20;
  std::vector<std::string> schemes = {"ued", "eed"};
  SystemConfig base;
  std::string out_path = "sweep.csv";
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Per-trial scheme comparison with the warm-start portfolio: schemes are
/// solved in dependency order and each one may seed its descent from the
/// already-solved competitors whose states lie inside its feasible set
/// (keeping the best candidate), so the mode orderings hold per seed.
std::map<std::string, SolveReport> compare_schemes(
    Problem problem, const ChannelSet& ch, const SystemConfig& cfg,
    const std::vector<std::string>& tags, const SchemeSolveOptions& opts = {});

/// Runs the sweep and writes a row per (axis value, scheme, trial) to
/// spec.out_path plus a per-point trimmed-mean summary next to it
/// ("<out>.summary.csv"). Rows are ordered by (axis, scheme, trial)
/// regardless of execution order; identical spec + seed reproduce identical
/// files except the wall-time column.
void run_experiment(const ExperimentSpec& spec);

/// Single-solve convergence trace as an iteration-indexed CSV.
void convergence_trace(const SystemConfig& cfg, Problem problem,
                       const std::string& scheme_tag, const std::string& out,
                       const SchemeSolveOptions& opts = {});

/// dB helpers; the CLI is the only conversion boundary.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace iosim

#endif
