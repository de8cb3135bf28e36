#include "iosim/beamforming.hpp"

#include <cmath>

#include "iosim/model.hpp"

namespace iosim {

RVec all_targets(const SystemConfig& cfg) {
  RVec t(cfg.users_total());
  for (int k = 0; k < cfg.users_total(); ++k) t[k] = cfg.target_of(k);
  return t;
}

RVec all_noises(const SystemConfig& cfg) {
  RVec n(cfg.users_total());
  for (int k = 0; k < cfg.users_total(); ++k) n[k] = cfg.noise_of(k);
  return n;
}

TxBeamResult solve_tx_beamforming(const CMat& composites, const RVec& targets,
                                  const RVec& noises, int k_r,
                                  double feasibility_cap) {
  const int k = static_cast<int>(composites.cols());
  const int nt = static_cast<int>(composites.rows());
  if (targets.size() != k || noises.size() != k)
    throw std::invalid_argument(
        "solve_tx_beamforming: targets/noises length mismatch");
  if (k_r < 0 || k_r > k)
    throw std::invalid_argument("solve_tx_beamforming: bad k_r split");

  TxBeamResult res;
  res.w = Beamformers::zeros(nt, k_r, k - k_r);
  if (k == 0) {
    res.feasible = true;
    return res;
  }

  // Unit-noise channels.
  CMat c(nt, k);
  for (int u = 0; u < k; ++u) {
    c.col(u) = composites.col(u) / std::sqrt(noises[u]);
    if (c.col(u).norm() == 0.0) return res;  // unreachable user
  }

  RVec q = RVec::Zero(k);
  const int max_iters = 5000;
  const double tol = 1e-13;
  bool converged = false;
  CMat sigma_inv;
  for (int it = 0; it < max_iters; ++it) {
    CMat sigma = CMat::Identity(nt, nt);
    for (int u = 0; u < k; ++u)
      sigma.noalias() += q[u] * (c.col(u) * c.col(u).adjoint());
    sigma_inv = sigma.llt().solve(CMat::Identity(nt, nt));
    double rel = 0.0, total = 0.0;
    for (int u = 0; u < k; ++u) {
      const double quad = std::real(cplx(c.col(u).dot(sigma_inv * c.col(u))));
      const double qn = (targets[u] / (1.0 + targets[u])) / quad;
      rel = std::max(rel, std::abs(qn - q[u]) / std::max(qn, 1e-300));
      q[u] = qn;
      total += qn;
    }
    res.iterations = it + 1;
    if (total > feasibility_cap) return res;  // diverging: targets unreachable
    if (rel < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) return res;

  // MMSE directions and the downlink power coupling system.
  CMat sigma = CMat::Identity(nt, nt);
  for (int u = 0; u < k; ++u)
    sigma.noalias() += q[u] * (c.col(u) * c.col(u).adjoint());
  CMat dirs(nt, k);
  for (int u = 0; u < k; ++u) {
    CVec d = sigma.llt().solve(c.col(u));
    dirs.col(u) = d / d.norm();
  }
  Eigen::MatrixXd coupling(k, k);
  for (int u = 0; u < k; ++u)
    for (int j = 0; j < k; ++j) {
      const double gain = std::norm(cplx(c.col(u).dot(dirs.col(j))));
      coupling(u, j) = (j == u) ? gain / targets[u] : -gain;
    }
  RVec p = coupling.partialPivLu().solve(RVec::Ones(k));
  if (!p.allFinite() || (p.array() < 0).any()) return res;

  for (int u = 0; u < k; ++u) {
    const CVec w = std::sqrt(p[u]) * dirs.col(u);
    if (u < k_r)
      res.w.w_r.col(u) = w;
    else
      res.w.w_t.col(u - k_r) = w;
  }
  res.power = p.sum();
  res.uplink_power = q;
  res.feasible = true;
  return res;
}

TxBeamResult solve_tx_beamforming(const ChannelSet& ch, const IosState& ios,
                                  const SystemConfig& cfg,
                                  double feasibility_cap) {
  return solve_tx_beamforming(composite_all(ch, ios), all_targets(cfg),
                              all_noises(cfg), cfg.k_r, feasibility_cap);
}

}  // namespace iosim
