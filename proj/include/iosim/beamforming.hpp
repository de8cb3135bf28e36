#ifndef IOSIM_BEAMFORMING_HPP
#define IOSIM_BEAMFORMING_HPP

#include "iosim/types.hpp"

namespace iosim {

struct TxBeamResult {
  bool feasible = false;
  Beamformers w;
  double power = 0.0;       // total transmit power at the optimum
  RVec uplink_power;        // virtual uplink powers (duality certificate)
  int iterations = 0;
};

/// Minimum-power transmit beamforming under per-user SINR constraints,
/// solved by the virtual-uplink fixed point: with unit-noise channels
/// c~_k = c_k / sigma_k,
///   q_k <- (G_k / (1 + G_k)) / (c~_k^H Sigma^-1 c~_k),
///   Sigma = I + sum_j q_j c~_j c~_j^H,
/// followed by MMSE beam directions and the K x K downlink power coupling
/// system. Every SINR constraint is active at the optimum. Divergence of the
/// uplink powers past feasibility_cap certifies infeasibility.
///
/// composites: n_tx x K matrix, one column per user ([reflected;transmitted]
/// order); targets, noises: length K, linear units. k_r splits the columns
/// back into the two precoder blocks.
TxBeamResult solve_tx_beamforming(const CMat& composites, const RVec& targets,
                                  const RVec& noises, int k_r,
                                  double feasibility_cap = 1e9);

/// Convenience wrapper evaluating the composite channels of (ch, ios).
TxBeamResult solve_tx_beamforming(const ChannelSet& ch, const IosState& ios,
                                  const SystemConfig& cfg,
                                  double feasibility_cap = 1e9);

/// Per-user targets / noises in the concatenated user order.
RVec all_targets(const SystemConfig& cfg);
RVec all_noises(const SystemConfig& cfg);

}  // namespace iosim

#endif
