#ifndef IOSIM_SUM_RATE_HPP
#define IOSIM_SUM_RATE_HPP

#include <optional>

#include "iosim/types.hpp"

namespace iosim {

struct SumRateOptions {
  int outer_max_iters = 200;
  double outer_rel_tol = 1e-4;
  double inner_sweep_tol = 1e-6;
  int inner_max_sweeps = 100;
  double power_bisection_rel_tol = 1e-9;
  int root_scan_points = 64;
  bool record_iterates = false;
};

/// Which blocks the descent cycles over; fixed-split modes freeze zeta and
/// the random-phase baseline freezes the phases too.
struct SrBlocks {
  bool phases = true;
  bool zeta = true;
};

/// MMSE receive scalars nu_k = c_k^H w_k / (||c_k^H [W_r W_t]||^2 + sigma_k^2).
CVec update_rx_scalars(const ChannelSet& ch, const IosState& ios,
                       const Beamformers& w, double noise_r, double noise_t);

/// Weight update mu_k = 1 / MSE_k; throws if any MSE is nonpositive.
RVec weights_from_mse(const RVec& mse);

struct BeamUpdate {
  Beamformers w;
  double lambda = 0.0;  // power-constraint multiplier
  bool ridged = false;  // hit the 1e-12 ridge fallback at lambda = 0
};

/// Closed-form precoder block: w_k = mu_k (H + lambda I)^-1 hbar_k with
/// hbar_k = nu_k c_k and H = sum mu_j hbar_j hbar_j^H; lambda = 0 when the
/// unconstrained solution fits the budget, otherwise the unique root of
/// total_power(lambda) = budget found by doubling plus bisection.
BeamUpdate update_beamformers(const CMat& composites, const CVec& nu,
                              const RVec& mu, int k_r, double budget,
                              double rel_tol = 1e-9);

/// Cyclic closed-form sweep of the unit-modulus quadratic
///   min phi^H E phi - 2 Re{phi^H f};
/// each element update is exact, the objective never increases. A vanishing
/// numerator keeps the previous phase (tie) and is counted.
CVec sweep_phases(const CMat& e_mat, const CVec& f_vec, const CVec& phi0,
                  double tol, int max_sweeps, int* tie_breaks = nullptr);

/// Coefficients of the weighted-MSE objective as a quadratic in one side's
/// phase vector (E Hermitian PSD, f the linear part).
void build_phase_quadratic(const ChannelSet& ch, const IosState& ios,
                           const Beamformers& w, const CVec& nu,
                           const RVec& mu, bool reflect_side, CMat* e_mat,
                           CVec* f_vec);

/// Coefficients of the weighted-MSE objective in (zeta, eta):
///   zeta^T H_r zeta - 2 Re{zeta^T p_r} + eta^T H_t eta - 2 Re{eta^T p_t}.
void build_energy_quadratic(const ChannelSet& ch, const IosState& ios,
                            const Beamformers& w, const CVec& nu,
                            const RVec& mu, CMat* h_r, CVec* p_r, CMat* h_t,
                            CVec* p_t);

/// Cyclic exact minimization over each zeta_m in [0,1] of
///   d1 x + d2 sqrt(1-x^2) + d3 x^2 + d4 (1-x^2),
/// taking the best of the interior stationary points and the endpoints.
RVec sweep_energy_split(const CMat& h_r, const CVec& p_r, const CMat& h_t,
                        const CVec& p_t, const RVec& zeta0, double tol,
                        int max_sweeps, int root_scan_points = 64);

/// Block-coordinate descent on the weighted-MSE surrogate of the sum rate:
/// nu -> mu -> W -> phi_r -> phi_t -> zeta per cycle, stopping on the
/// relative change of the surrogate. objective_trace carries the sum rate
/// in bits; aux_trace the surrogate sum(mu MSE - ln mu), which every block
/// minimizes exactly (non-increasing trace) and which equals
/// K - sum ln(1 + sinr) right after the nu, mu updates.
SolveReport solve_sum_rate(const ChannelSet& ch, const SystemConfig& cfg,
                           const SumRateOptions& opts = {},
                           const SrBlocks& blocks = {},
                           std::optional<IosState> warm_ios = {},
                           std::optional<Beamformers> warm_w = {});

}  // namespace iosim

#endif
