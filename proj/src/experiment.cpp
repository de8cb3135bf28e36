#include "iosim/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "iosim/channel.hpp"
#include "iosim/rng.hpp"

namespace iosim {

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::SinrTarget: return "sinr_target";
    case SweepAxis::NElements: return "n_elements";
    case SweepAxis::PowerBudget: return "power_budget";
    case SweepAxis::UserRatio: return "user_ratio";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& s) {
  if (s == "sinr_target") return SweepAxis::SinrTarget;
  if (s == "n_elements") return SweepAxis::NElements;
  if (s == "power_budget") return SweepAxis::PowerBudget;
  if (s == "user_ratio") return SweepAxis::UserRatio;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("no schemes listed");
  if (axis == SweepAxis::UserRatio) {
    if (ratio_values.empty())
      throw std::invalid_argument("user_ratio axis needs (k_r, k_t) pairs");
  } else {
    if (values.empty()) throw std::invalid_argument("axis needs values");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] <= values[i - 1])
        throw std::invalid_argument("axis values must be strictly increasing");
  }
  base.validate();
}

namespace {

/// Competitors whose final states seed a scheme's descent (they must be
/// feasible points of the scheme's own constraint set).
const std::vector<std::string>& warm_sources(const std::string& tag) {
  static const std::vector<std::string> for_eed = {"random-eed"};
  static const std::vector<std::string> for_ued = {"eed", "sd", "irs",
                                                   "random-eed"};
  static const std::vector<std::string> none = {};
  if (tag == "eed") return for_eed;
  if (tag == "ued") return for_ued;
  return none;
}

/// Solve order such that warm sources come first.
std::vector<std::string> ordered_tags(std::vector<std::string> tags) {
  const std::vector<std::string> rank = {"none", "irs",        "sd", "td",
                                         "random-eed", "eed", "ued"};
  std::vector<std::string> out;
  for (const auto& r : rank)
    for (const auto& t : tags)
      if (t == r) out.push_back(t);
  for (const auto& t : tags)
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

bool better(Problem p, const SolveReport& a, const SolveReport& b) {
  // is a better than b?
  if (b.status == SolveStatus::Infeasible)
    return a.status != SolveStatus::Infeasible;
  if (a.status == SolveStatus::Infeasible) return false;
  return p == Problem::PowerMin
             ? a.final_objective() < b.final_objective()
             : a.final_objective() > b.final_objective();
}

}  // namespace

std::map<std::string, SolveReport> compare_schemes(
    Problem problem, const ChannelSet& ch, const SystemConfig& cfg,
    const std::vector<std::string>& tags, const SchemeSolveOptions& opts) {
  std::map<std::string, SolveReport> out;
  for (const auto& tag : ordered_tags(tags)) {
    const Scheme scheme =
        scheme_from_tag(tag, ch.n_elements(), cfg.k_r, cfg.k_t);
    SolveReport best = solve_with_mode(problem, ch, cfg, scheme, opts);
    if (!scheme.time_division && !scheme.random_phase) {
      for (const auto& src : warm_sources(tag)) {
        const auto it = out.find(src);
        if (it == out.end() || it->second.status == SolveStatus::Infeasible)
          continue;
        SolveReport cand = solve_with_mode(
            problem, ch, cfg, scheme, opts, it->second.ios,
            problem == Problem::SumRate
                ? std::optional<Beamformers>(it->second.beams)
                : std::nullopt);
        if (better(problem, cand, best)) best = std::move(cand);
      }
    }
    out.emplace(tag, std::move(best));
  }
  return out;
}

namespace {

struct Point {
  std::string axis_label;
  SystemConfig cfg;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<Point> sweep_points(const ExperimentSpec& spec) {
  std::vector<Point> pts;
  if (spec.axis == SweepAxis::UserRatio) {
    for (const auto& [kr, kt] : spec.ratio_values) {
      Point p;
      p.axis_label = std::to_string(kr) + "/" + std::to_string(kt);
      p.cfg = spec.base;
      p.cfg.k_r = kr;
      p.cfg.k_t = kt;
      p.cfg.sinr_targets_r = RVec::Constant(kr, spec.base.target_of(0));
      p.cfg.sinr_targets_t = RVec::Constant(
          kt, spec.base.target_of(spec.base.k_r > 0 ? spec.base.k_r : 0));
      pts.push_back(std::move(p));
    }
    return pts;
  }
  for (double v : spec.values) {
    Point p;
    p.axis_label = format_double(v);
    p.cfg = spec.base;
    switch (spec.axis) {
      case SweepAxis::SinrTarget: {
        const double linear = db_to_linear(v);
        p.cfg.sinr_targets_r = RVec::Constant(p.cfg.k_r, linear);
        p.cfg.sinr_targets_t = RVec::Constant(p.cfg.k_t, linear);
        break;
      }
      case SweepAxis::NElements:
        p.cfg.n_elements = static_cast<int>(v);
        break;
      case SweepAxis::PowerBudget:
        p.cfg.power_budget = db_to_linear(v);  // dBW in, watts out
        break;
      case SweepAxis::UserRatio:
        break;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

struct Row {
  std::string axis_label;
  std::string scheme;
  int trial = 0;
  std::uint64_t seed = 0;
  SolveReport rep;
  double wall_ms = 0.0;
  bool done = false;
};

}  // namespace

void run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Point> pts = sweep_points(spec);

  struct Task {
    int point = 0;
    int trial = 0;
  };
  std::vector<Task> tasks;
  for (int pi = 0; pi < static_cast<int>(pts.size()); ++pi)
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({pi, t});

  // one slot per (point, scheme, trial); filled out of order, written in order
  std::vector<Row> rows(pts.size() * spec.schemes.size() * spec.trials);
  auto slot = [&](int pi, int si, int trial) -> Row& {
    return rows[(pi * spec.schemes.size() + si) * spec.trials + trial];
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const Task task = tasks[i];
      SystemConfig cfg = pts[task.point].cfg;
      cfg.seed = mix_seed(spec.base.seed, task.trial);
      const ChannelSet ch = sample_channels(cfg);
      const auto t0 = std::chrono::steady_clock::now();
      auto by_scheme =
          compare_schemes(spec.problem, ch, cfg, spec.schemes, {});
      const auto t1 = std::chrono::steady_clock::now();
      const double ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count() /
          spec.schemes.size();
      for (int si = 0; si < static_cast<int>(spec.schemes.size()); ++si) {
        Row& r = slot(task.point, si, task.trial);
        r.axis_label = pts[task.point].axis_label;
        r.scheme = spec.schemes[si];
        r.trial = task.trial;
        r.seed = cfg.seed;
        r.rep = by_scheme.at(spec.schemes[si]);
        r.wall_ms = ms;
        r.done = true;
      }
    }
  };

  int n_threads = spec.threads > 0
                      ? spec.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, tasks.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ofstream os(spec.out_path);
  if (!os) throw std::runtime_error("cannot write " + spec.out_path);
  os << "# iosim-sweep v1\n";
  os << "# problem="
     << (spec.problem == Problem::PowerMin ? "power_min" : "sum_rate")
     << " axis=" << to_string(spec.axis) << " trials=" << spec.trials
     << " base_seed=" << spec.base.seed << " generator=" << Philox::kName
     << "\n";
  os << "# units: sinr_target axis dB, power_budget axis dBW; objective "
        "watts (power_min) or bits/s/Hz (sum_rate)\n";
  os << "axis,axis_value,scheme,trial,seed,objective,iterations,status,"
        "wall_ms\n";
  for (const Row& r : rows) {
    os << to_string(spec.axis) << ',' << r.axis_label << ',' << r.scheme
       << ',' << r.trial << ',' << r.seed << ','
       << (r.rep.status == SolveStatus::Infeasible
               ? "nan"
               : format_double(r.rep.final_objective()))
       << ',' << r.rep.iterations << ',' << to_string(r.rep.status) << ','
       << format_double(r.wall_ms) << "\n";
  }
  os.close();

  // summary: trimmed mean over feasible trials, infeasibility rate
  std::ofstream ss(spec.out_path + ".summary.csv");
  if (!ss) throw std::runtime_error("cannot write summary");
  ss << "# iosim-sweep-summary v1 (mean over feasible trials; infeasible "
        "trials dropped and reported as a rate)\n";
  ss << "axis,axis_value,scheme,trials,feasible,infeasible_rate,"
        "mean_objective\n";
  for (int pi = 0; pi < static_cast<int>(pts.size()); ++pi)
    for (int si = 0; si < static_cast<int>(spec.schemes.size()); ++si) {
      double acc = 0.0;
      int ok = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const Row& r = slot(pi, si, t);
        if (r.rep.status != SolveStatus::Infeasible) {
          acc += r.rep.final_objective();
          ++ok;
        }
      }
      ss << to_string(spec.axis) << ',' << pts[pi].axis_label << ','
         << spec.schemes[si] << ',' << spec.trials << ',' << ok << ','
         << format_double(spec.trials > 0
                              ? 1.0 - double(ok) / spec.trials
                              : 0.0)
         << ',' << (ok > 0 ? format_double(acc / ok) : "nan") << "\n";
    }
}

void convergence_trace(const SystemConfig& cfg, Problem problem,
                       const std::string& scheme_tag, const std::string& out,
                       const SchemeSolveOptions& opts) {
  const ChannelSet ch = sample_channels(cfg);
  const Scheme scheme =
      scheme_from_tag(scheme_tag, cfg.n_elements, cfg.k_r, cfg.k_t);
  const SolveReport rep =
      solve_with_mode(problem, ch, cfg, scheme, opts);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  os << "# iosim-trace v1\n";
  os << "# problem="
     << (problem == Problem::PowerMin ? "power_min" : "sum_rate")
     << " scheme=" << scheme_tag << " seed=" << cfg.seed
     << " status=" << to_string(rep.status) << "\n";
  if (problem == Problem::PowerMin) {
    os << "iter,total_power_w\n";
    for (std::size_t i = 0; i < rep.objective_trace.size(); ++i)
      os << i << ',' << format_double(rep.objective_trace[i]) << "\n";
  } else {
    os << "iter,sum_rate,surrogate\n";
    for (std::size_t i = 0; i < rep.objective_trace.size(); ++i)
      os << i << ',' << format_double(rep.objective_trace[i]) << ','
         << format_double(i < rep.aux_trace.size() ? rep.aux_trace[i] : 0.0)
         << "\n";
  }
}

}  // namespace iosim
