#include "iosim/model.hpp"

#include <cmath>

namespace iosim {

namespace {

void check_user(const ChannelSet& ch, int user) {
  if (user < 0 || user >= ch.k_r() + ch.k_t())
    throw std::out_of_range("user index out of range");
}

}  // namespace

CVec composite_from_coeffs(const ChannelSet& ch, const CVec& reflect_coeff,
                           const CVec& transmit_coeff, int user) {
  check_user(ch, user);
  const int m = ch.n_elements();
  if (m > 0 &&
      (reflect_coeff.size() != m || transmit_coeff.size() != m))
    throw std::invalid_argument("coefficient length != n_elements");
  if (user < ch.k_r()) {
    CVec c = ch.h_d.col(user);
    if (m > 0)
      c += ch.g.adjoint() *
           (reflect_coeff.conjugate().array() * ch.h_r.col(user).array())
               .matrix();
    return c;
  }
  const int j = user - ch.k_r();
  CVec c = CVec::Zero(ch.n_tx());
  if (m > 0)
    c = ch.g.adjoint() *
        (transmit_coeff.conjugate().array() * ch.h_t.col(j).array()).matrix();
  return c;
}

CVec composite_channel(const ChannelSet& ch, const IosState& ios, int user) {
  check_user(ch, user);
  if (ios.mode == Mode::None || ch.n_elements() == 0) {
    if (user < ch.k_r()) return ch.h_d.col(user);
    return CVec::Zero(ch.n_tx());
  }
  if (ios.n_elements() != ch.n_elements())
    throw std::invalid_argument("surface state length != n_elements");
  return composite_from_coeffs(ch, ios.reflect_coeff(), ios.transmit_coeff(),
                               user);
}

CMat composite_all(const ChannelSet& ch, const IosState& ios) {
  const int k = ch.k_r() + ch.k_t();
  CMat c(ch.n_tx(), k);
  for (int u = 0; u < k; ++u) c.col(u) = composite_channel(ch, ios, u);
  return c;
}

RVec sinr_all(const ChannelSet& ch, const IosState& ios, const Beamformers& w,
              double noise_r, double noise_t) {
  const int kr = ch.k_r(), k = kr + ch.k_t();
  if (w.k_r() != kr || w.k_t() != ch.k_t())
    throw std::invalid_argument("beamformer column counts mismatch");
  if (noise_r <= 0 || noise_t <= 0)
    throw std::invalid_argument("noise powers must be > 0");
  RVec out(k);
  for (int u = 0; u < k; ++u) {
    const CVec c = composite_channel(ch, ios, u);
    double signal = 0.0, interf = 0.0;
    for (int j = 0; j < k; ++j) {
      const double p = std::norm(cplx(c.dot(w.column(j))));
      if (j == u)
        signal = p;
      else
        interf += p;
    }
    out[u] = signal / (interf + (u < kr ? noise_r : noise_t));
  }
  return out;
}

double sum_rate(const ChannelSet& ch, const IosState& ios,
                const Beamformers& w, double noise_r, double noise_t) {
  const RVec s = sinr_all(ch, ios, w, noise_r, noise_t);
  double rate = 0.0;
  for (int u = 0; u < s.size(); ++u) rate += std::log2(1.0 + s[u]);
  return rate;
}

double total_power(const Beamformers& w) {
  return w.w_r.squaredNorm() + w.w_t.squaredNorm();
}

RVec mse_all(const ChannelSet& ch, const IosState& ios, const Beamformers& w,
             const CVec& nu, double noise_r, double noise_t) {
  const int kr = ch.k_r(), k = kr + ch.k_t();
  if (nu.size() != k) throw std::invalid_argument("nu length != user count");
  RVec out(k);
  for (int u = 0; u < k; ++u) {
    const CVec c = composite_channel(ch, ios, u);
    double rx = 0.0;
    cplx own = 0.0;
    for (int j = 0; j < k; ++j) {
      const cplx a = c.dot(w.column(j));
      rx += std::norm(a);
      if (j == u) own = a;
    }
    const double sigma2 = u < kr ? noise_r : noise_t;
    out[u] = std::norm(nu[u]) * (rx + sigma2) -
             2.0 * std::real(std::conj(nu[u]) * own) + 1.0;
  }
  return out;
}

}  // namespace iosim
