#ifndef IOSIM_POWER_MIN_HPP
#define IOSIM_POWER_MIN_HPP

#include <optional>

#include "iosim/beamforming.hpp"
#include "iosim/manifold.hpp"
#include "iosim/types.hpp"

namespace iosim {

struct PowerMinOptions {
  int outer_max_iters = 100;
  double outer_rel_tol = 1e-4;
  double dinkelbach_tol = 1e-5;
  int dinkelbach_max_rounds = 50;
  double bisection_tol = 1e-6;  // interval width of the per-element refine
  double feasibility_cap = 1e9;
  int init_random_retries = 10;
  int zeta_scan_points = 64;
  int zeta_max_rounds = 30;
  RcgOptions rcg = {.max_iters = 200, .grad_tol = 1e-7, .armijo = {},
                    .pr_plus = true};
  bool record_iterates = false;
};

/// Which blocks the outer loop is allowed to update. Fixed-split control
/// modes freeze zeta; a surface-less run freezes everything.
struct PmBlocks {
  bool phases_r = true;
  bool phases_t = true;
  bool zeta = true;
};

/// Per-user ratio-descent residuals as factored quadratics in one side's
/// phase vector: f_k(phi) = sum_j s_j |v_{k,j}^H phi + hbar_{k,j}|^2
/// + target_k sigma^2 with s_j = target_k for j != k and s_k = -lambda.
/// At the current phases f_k equals target_k (interference + sigma^2)
/// - lambda |signal_k|^2, so max_k f_k = 0 at lambda = max_k target/sinr.
std::vector<QuadraticTerm> phase_design_terms(const ChannelSet& ch,
                                              const IosState& ios,
                                              const Beamformers& w,
                                              const SystemConfig& cfg,
                                              bool reflect_side,
                                              double lambda);

/// Worst-margin reducing update of the reflecting phases: alternates the
/// ratio update lambda = max_k target_k / sinr_k with a conjugate-gradient
/// descent of the smoothed maximum of the per-user quadratic residuals.
/// Returns phases whose worst target/SINR ratio over the reflected users is
/// no larger than at entry.
CVec design_reflect_phases(const ChannelSet& ch, const IosState& ios,
                           const Beamformers& w, const SystemConfig& cfg,
                           const PowerMinOptions& opts = {});

/// Transmitted-side analogue; the residuals carry no linear term because
/// transmitted users have no direct path.
CVec design_transmit_phases(const ChannelSet& ch, const IosState& ios,
                            const Beamformers& w, const SystemConfig& cfg,
                            const PowerMinOptions& opts = {});

/// Min-margin increasing update of the energy split: alternates the ratio
/// update kappa = max_k target_k / sinr_k (over all users) with cyclic
/// per-element 1-D minimization of the upper envelope of the per-user
/// residuals, each a quadratic in zeta_m or eta_m. The returned split never
/// lowers min_k sinr_k / target_k.
RVec design_energy_split(const ChannelSet& ch, const IosState& ios,
                         const Beamformers& w, const SystemConfig& cfg,
                         const PowerMinOptions& opts = {});

/// Three-step alternating solver for total transmit power minimization
/// under per-user SINR constraints: beamforming by uplink-downlink duality,
/// phase design per side, energy-split design; repeats until the power
/// change falls below outer_rel_tol. The power trace is non-increasing.
SolveReport solve_power_min(const ChannelSet& ch, const SystemConfig& cfg,
                            const PowerMinOptions& opts = {},
                            const PmBlocks& blocks = {},
                            std::optional<IosState> warm_start = {});

/// Phase initializer: coherently aligns each element's cascade toward the
/// strongest user on the given side (reference transmit direction u).
CVec align_phases(const CVec& h_side, const CMat& g, const CVec& u);

/// Bootstrap surface state: equal split, cascade-aligned phases.
IosState bootstrap_ios(const ChannelSet& ch, const SystemConfig& cfg,
                       Mode mode = Mode::UED);

}  // namespace iosim

#endif
