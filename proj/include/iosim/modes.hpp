#ifndef IOSIM_MODES_HPP
#define IOSIM_MODES_HPP

#include <optional>
#include <string>
#include <vector>

#include "iosim/power_min.hpp"
#include "iosim/sum_rate.hpp"
#include "iosim/types.hpp"

namespace iosim {

/// Control-mode description. For SD the listed elements reflect and the rest
/// transmit; for TD the slots split the frame [tau_r, tau_t].
struct ModeSpec {
  Mode mode = Mode::UED;
  std::vector<int> reflect_set;  // SD only
  double tau_r = 0.5;
  double tau_t = 0.5;

  /// Default spec for a mode; SD assigns the first
  /// ceil(M * k_r / (k_r + k_t)) elements to reflection.
  static ModeSpec by_mode(Mode m, int n_elements, int k_r, int k_t);
};

/// Projects a surface state onto the feasible set of the control mode
/// (identity for UED). Idempotent; throws on a malformed SD partition.
IosState project_mode(const IosState& state, const ModeSpec& spec);

enum class Problem { PowerMin, SumRate };

/// Comparison schemes of the experiment suite: the control modes plus the
/// random-phase EED baseline ("random-eed") and time division ("td").
struct Scheme {
  std::string tag;
  ModeSpec spec;
  bool random_phase = false;  // draw phases, optimize only the precoders
  bool time_division = false;
};

Scheme scheme_from_tag(const std::string& tag, int n_elements, int k_r,
                       int k_t);

struct SchemeSolveOptions {
  PowerMinOptions pm;
  SumRateOptions sr;
};

/// Runs the chosen solver under a control scheme, replacing or skipping the
/// frozen blocks. TD solves the two time slots independently and combines
/// them (power: max of slots; rate: tau-weighted sum). An optional warm
/// start seeds the surface state (and precoders, for the sum-rate problem).
SolveReport solve_with_mode(Problem problem, const ChannelSet& ch,
                            const SystemConfig& cfg, const Scheme& scheme,
                            const SchemeSolveOptions& opts = {},
                            std::optional<IosState> warm_ios = {},
                            std::optional<Beamformers> warm_w = {});

}  // namespace iosim

#endif
