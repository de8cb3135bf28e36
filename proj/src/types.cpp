#include "iosim/types.hpp"

#include <cmath>

namespace iosim {

double SystemConfig::target_of(int user) const {
  if (user < k_r) {
    return sinr_targets_r.size() > user ? sinr_targets_r[user] : 100.0;
  }
  const int j = user - k_r;
  return sinr_targets_t.size() > j ? sinr_targets_t[j] : 100.0;
}

void SystemConfig::validate() const {
  if (n_tx < 1) throw std::invalid_argument("n_tx must be >= 1");
  if (n_elements < 0) throw std::invalid_argument("n_elements must be >= 0");
  if (k_r < 0 || k_t < 0 || k_r + k_t < 1)
    throw std::invalid_argument("need k_r, k_t >= 0 with k_r + k_t >= 1");
  if (noise_r <= 0 || noise_t <= 0)
    throw std::invalid_argument("noise powers must be > 0");
  if (power_budget <= 0)
    throw std::invalid_argument("power budget must be > 0");
  if (geometry.d_bi <= 0 || geometry.d_iu <= 0)
    throw std::invalid_argument("distances must be > 0");
  if (ref_gain <= 0) throw std::invalid_argument("ref_gain must be > 0");
  if (sinr_targets_r.size() != 0 && sinr_targets_r.size() != k_r)
    throw std::invalid_argument("sinr_targets_r size mismatch");
  if (sinr_targets_t.size() != 0 && sinr_targets_t.size() != k_t)
    throw std::invalid_argument("sinr_targets_t size mismatch");
  for (int k = 0; k < k_r + k_t; ++k)
    if (target_of(k) <= 0)
      throw std::invalid_argument("SINR targets must be > 0");
}

void ChannelSet::validate() const {
  if (h_r.rows() != g.rows() || h_t.rows() != g.rows())
    throw std::invalid_argument("surface-side channel length != n_elements");
  if (h_d.cols() != h_r.cols())
    throw std::invalid_argument("h_d and h_r disagree on k_r");
  if (h_d.rows() != g.cols() && h_d.cols() > 0)
    throw std::invalid_argument("h_d length != n_tx");
  auto finite = [](const CMat& a) { return a.allFinite(); };
  if (!finite(g) || !finite(h_d) || !finite(h_r) || !finite(h_t))
    throw std::invalid_argument("channel entries must be finite");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::UED: return "ued";
    case Mode::EED: return "eed";
    case Mode::SD: return "sd";
    case Mode::TDReflect: return "td-reflect";
    case Mode::TDTransmit: return "td-transmit";
    case Mode::IRS: return "irs";
    case Mode::None: return "none";
  }
  return "?";
}

Mode mode_from_string(const std::string& tag) {
  if (tag == "ued") return Mode::UED;
  if (tag == "eed") return Mode::EED;
  if (tag == "sd") return Mode::SD;
  if (tag == "td-reflect") return Mode::TDReflect;
  if (tag == "td-transmit") return Mode::TDTransmit;
  if (tag == "irs") return Mode::IRS;
  if (tag == "none") return Mode::None;
  throw std::invalid_argument("unknown mode tag: " + tag);
}

void IosState::validate(double phase_tol) const {
  if (phi_r.size() != zeta.size() || phi_t.size() != zeta.size())
    throw std::invalid_argument("IosState vectors disagree on length");
  for (int m = 0; m < zeta.size(); ++m) {
    if (std::abs(std::abs(phi_r[m]) - 1.0) > phase_tol)
      throw std::invalid_argument("phi_r is not unit modulus at element " +
                                  std::to_string(m));
    if (std::abs(std::abs(phi_t[m]) - 1.0) > phase_tol)
      throw std::invalid_argument("phi_t is not unit modulus at element " +
                                  std::to_string(m));
    if (!(zeta[m] >= 0.0 && zeta[m] <= 1.0))
      throw std::invalid_argument("zeta out of [0,1] at element " +
                                  std::to_string(m));
  }
}

IosState IosState::neutral(int m, Mode mode) {
  IosState s;
  s.phi_r = CVec::Ones(m);
  s.phi_t = CVec::Ones(m);
  s.zeta = RVec::Constant(m, 1.0 / std::sqrt(2.0));
  s.mode = mode;
  return s;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

}  // namespace iosim
