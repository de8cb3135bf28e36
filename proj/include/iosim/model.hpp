#ifndef IOSIM_MODEL_HPP
#define IOSIM_MODEL_HPP

#include "iosim/types.hpp"

namespace iosim {

/// Effective BS -> user channel, conjugated to a column vector c so that
/// c^H w is the received amplitude under precoder w.
///
/// Reflected user k:    c^H = h_r^H diag(zeta .* phi_r) G + h_d^H
/// Transmitted user k:  c^H = h_t^H diag(eta .* phi_t) G  (no direct path)
///
/// Users are indexed [reflected; transmitted]; mode None removes the surface
/// entirely (reflected users keep the direct path, transmitted users get a
/// zero channel).
CVec composite_channel(const ChannelSet& ch, const IosState& ios, int user);

/// Same map from raw element-coefficient vectors; this is the linear-in-
/// coefficients core that composite_channel wraps.
CVec composite_from_coeffs(const ChannelSet& ch, const CVec& reflect_coeff,
                           const CVec& transmit_coeff, int user);

/// n_tx x (k_r + k_t) matrix of all composite channels.
CMat composite_all(const ChannelSet& ch, const IosState& ios);

/// Per-user SINR, [reflected; transmitted] order. The interference sum runs
/// over every other column of [W_r, W_t].
RVec sinr_all(const ChannelSet& ch, const IosState& ios, const Beamformers& w,
              double noise_r, double noise_t);

/// Sum of log2(1 + SINR) over all users [bits/s/Hz].
double sum_rate(const ChannelSet& ch, const IosState& ios,
                const Beamformers& w, double noise_r, double noise_t);

/// Total transmit power ||[W_r, W_t]||_F^2 [W].
double total_power(const Beamformers& w);

/// Per-user mean-square error of the scalar receive estimate nu_k:
///   MSE_k = sum_j |nu_k^* c_k^H w_j|^2 - 2 Re{nu_k^* c_k^H w_k}
///           + |nu_k|^2 sigma_k^2 + 1.
RVec mse_all(const ChannelSet& ch, const IosState& ios, const Beamformers& w,
             const CVec& nu, double noise_r, double noise_t);

}  // namespace iosim

#endif
