#ifndef IOSIM_ORACLE_HPP
#define IOSIM_ORACLE_HPP

#include "iosim/types.hpp"

namespace iosim::oracle {

/// Reference solvers for desk-size instances, independent of the descent
/// machinery in the main solvers. The two-user problems are reduced to the
/// channel Gram invariants (g1, g2, rho): per-user gains of the unit-noise
/// channels and their squared normalized inner product.

/// Minimum total transmit power meeting SINR targets (t1, t2) for two users
/// with unit-noise channel gains g1, g2 and alignment rho in [0, 1].
/// Returns +inf when the targets are unreachable (rho = 1, t1 t2 >= 1).
double two_user_min_power(double g1, double g2, double rho, double t1,
                          double t2);

/// Single-user closed form t / g.
inline double one_user_min_power(double g, double t) {
  return g > 0 ? t / g : std::numeric_limits<double>::infinity();
}

/// Best sum rate of descent-based weighted-MMSE beamforming for two users
/// with unit-noise gains (g1, g2), alignment rho, and power budget P;
/// multi-started so the two-user optimum is reliably reached.
double two_user_max_rate(double g1, double g2, double rho, double budget);

/// Joint grid search over the full surface parameter space of an
/// n_tx = 2, M = 2, K_r = K_t = 1 instance: phases on a 2*pi/100 grid,
/// amplitudes on a 0.01 grid. The transmit-side global phase is factored
/// out exactly (rates and powers depend on it only through the Gram
/// invariants), which brings the enumeration to ~1e10 points.
struct TinyGridResult {
  double pm_min_power = 0.0;  // exact minimum over the grid
  // the sum-rate maximum is certified by an interval: lower bound from
  // achieved grid points, upper bound from monotone dominance over
  // (g_r up, g_t up, rho down) on a 512 x 512 bucket lattice
  double sr_lower = 0.0;
  double sr_upper = 0.0;
  long long points = 0;
};

TinyGridResult tiny_joint_grid(const ChannelSet& ch, const SystemConfig& cfg,
                               bool want_pm = true, bool want_sr = true);

}  // namespace iosim::oracle

#endif
