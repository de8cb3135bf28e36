#include "iosim/sum_rate.hpp"

#include <cmath>

#include "iosim/model.hpp"
#include "iosim/power_min.hpp"

namespace iosim {

CVec update_rx_scalars(const ChannelSet& ch, const IosState& ios,
                       const Beamformers& w, double noise_r, double noise_t) {
  const int kr = ch.k_r(), k = kr + ch.k_t();
  CVec nu(k);
  for (int u = 0; u < k; ++u) {
    const CVec c = composite_channel(ch, ios, u);
    double rx = 0.0;
    cplx own = 0.0;
    for (int j = 0; j < k; ++j) {
      const cplx a = c.dot(w.column(j));
      rx += std::norm(a);
      if (j == u) own = a;
    }
    nu[u] = own / (rx + (u < kr ? noise_r : noise_t));
  }
  return nu;
}

RVec weights_from_mse(const RVec& mse) {
  RVec mu(mse.size());
  for (int u = 0; u < mse.size(); ++u) {
    if (!(mse[u] > 0))
      throw std::domain_error("weights_from_mse: MSE must be positive");
    mu[u] = 1.0 / mse[u];
  }
  return mu;
}

BeamUpdate update_beamformers(const CMat& composites, const CVec& nu,
                              const RVec& mu, int k_r, double budget,
                              double rel_tol) {
  const int k = static_cast<int>(composites.cols());
  const int nt = static_cast<int>(composites.rows());
  if (nu.size() != k || mu.size() != k)
    throw std::invalid_argument("update_beamformers: nu/mu length mismatch");
  if (budget <= 0)
    throw std::invalid_argument("update_beamformers: budget must be > 0");

  BeamUpdate out;
  out.w = Beamformers::zeros(nt, k_r, k - k_r);
  if (k == 0) return out;

  CMat hbar(nt, k);
  for (int u = 0; u < k; ++u) hbar.col(u) = nu[u] * composites.col(u);
  CMat h = CMat::Zero(nt, nt);
  for (int u = 0; u < k; ++u)
    h.noalias() += mu[u] * (hbar.col(u) * hbar.col(u).adjoint());

  Eigen::SelfAdjointEigenSolver<CMat> eig(h);
  const RVec d = eig.eigenvalues();
  const CMat basis = eig.eigenvectors();
  CMat proj(nt, k);  // basis^H hbar
  for (int u = 0; u < k; ++u) proj.col(u) = basis.adjoint() * hbar.col(u);

  RVec pw = RVec::Zero(nt);  // power(lambda) = sum_i pw_i / (d_i + lambda)^2
  for (int i = 0; i < nt; ++i)
    for (int u = 0; u < k; ++u)
      pw[i] += mu[u] * mu[u] * std::norm(proj(i, u));

  const double d_floor = 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff());
  auto power_at = [&](double lambda) {
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
      const double den = d[i] + lambda;
      if (den <= 0) return 1e300;
      total += pw[i] / (den * den);
    }
    return total;
  };

  double lambda = 0.0;
  bool null_mass = false;
  for (int i = 0; i < nt; ++i)
    if (d[i] <= d_floor && pw[i] > 1e-30 * std::max(pw.maxCoeff(), 1e-300))
      null_mass = true;
  const double p0 = null_mass ? 1e300 : power_at(0.0);
  if (p0 <= budget) {
    lambda = 0.0;
  } else {
    double lo = 0.0, hi = 1.0;
    while (power_at(hi) > budget && hi < 1e30) {
      lo = hi;
      hi *= 2.0;
    }
    // bisection on the strictly decreasing power(lambda)
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double p = power_at(mid);
      if (p > budget)
        lo = mid;
      else
        hi = mid;
      if (std::abs(p - budget) <= rel_tol * budget) break;
    }
    lambda = hi;  // the feasible side: power(hi) <= budget
  }
  out.lambda = lambda;

  for (int u = 0; u < k; ++u) {
    CVec scaled(nt);
    for (int i = 0; i < nt; ++i) {
      double den = d[i] + lambda;
      if (den <= d_floor) {
        // 1e-12 ridge on a (numerically) singular direction at lambda = 0
        den = std::max(d_floor, 1e-12);
        if (std::norm(proj(i, u)) > 1e-16 * hbar.col(u).squaredNorm())
          out.ridged = true;
      }
      scaled[i] = proj(i, u) / den;
    }
    const CVec w = mu[u] * (basis * scaled);
    if (u < k_r)
      out.w.w_r.col(u) = w;
    else
      out.w.w_t.col(u - k_r) = w;
  }
  return out;
}

CVec sweep_phases(const CMat& e_mat, const CVec& f_vec, const CVec& phi0,
                  double tol, int max_sweeps, int* tie_breaks) {
  const int m = static_cast<int>(phi0.size());
  if (e_mat.rows() != m || e_mat.cols() != m || f_vec.size() != m)
    throw std::invalid_argument("sweep_phases: dimension mismatch");
  CVec phi = phi0;
  if (tie_breaks) *tie_breaks = 0;
  if (m == 0) return phi;

  auto objective = [&](const CVec& p) {
    return std::real(cplx(p.dot(e_mat * p))) - 2.0 * std::real(cplx(p.dot(f_vec)));
  };

  CVec coupled = e_mat * phi;
  double prev = objective(phi);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < m; ++i) {
      const cplx numer = f_vec[i] - (coupled[i] - e_mat(i, i) * phi[i]);
      const double mag = std::abs(numer);
      if (mag == 0.0) {
        if (tie_breaks) ++(*tie_breaks);
        continue;
      }
      const cplx next = numer / mag;
      const cplx delta = next - phi[i];
      if (delta != cplx(0.0)) {
        coupled += delta * e_mat.col(i);
        phi[i] = next;
      }
    }
    coupled = e_mat * phi;  // refresh accumulated drift
    const double cur = objective(phi);
    if (std::abs(prev - cur) <= tol * std::max(1.0, std::abs(prev))) break;
    prev = cur;
  }
  return phi;
}

void build_phase_quadratic(const ChannelSet& ch, const IosState& ios,
                           const Beamformers& w, const CVec& nu,
                           const RVec& mu, bool reflect_side, CMat* e_mat,
                           CVec* f_vec) {
  const int m = ch.n_elements();
  const int kr = ch.k_r(), k = kr + ch.k_t();
  const int k_side = reflect_side ? kr : ch.k_t();
  const RVec amp = reflect_side ? RVec(ios.zeta) : RVec(ios.eta());

  *e_mat = CMat::Zero(m, m);
  *f_vec = CVec::Zero(m);
  CMat gw(m, k);
  for (int j = 0; j < k; ++j) gw.col(j) = ch.g * w.column(j);

  for (int s = 0; s < k_side; ++s) {
    const int user = reflect_side ? s : kr + s;
    const CVec h_eff =
        reflect_side
            ? CVec((ch.h_r.col(s).array() * amp.array()).matrix())
            : CVec((ch.h_t.col(s).array() * amp.array()).matrix());
    const double weight = mu[user] * std::norm(nu[user]);
    CVec lin = CVec::Zero(m);
    for (int j = 0; j < k; ++j) {
      const CVec u =
          (h_eff.array() * gw.col(j).conjugate().array()).matrix();
      e_mat->noalias() += weight * (u * u.adjoint());
      const cplx direct =
          reflect_side ? cplx(ch.h_d.col(s).dot(w.column(j))) : cplx(0.0);
      lin -= weight * direct * u;
      if (j == user) lin += mu[user] * nu[user] * u;
    }
    *f_vec += lin;
  }
}

void build_energy_quadratic(const ChannelSet& ch, const IosState& ios,
                            const Beamformers& w, const CVec& nu,
                            const RVec& mu, CMat* h_r, CVec* p_r, CMat* h_t,
                            CVec* p_t) {
  const int m = ch.n_elements();
  const int kr = ch.k_r(), k = kr + ch.k_t();
  *h_r = CMat::Zero(m, m);
  *h_t = CMat::Zero(m, m);
  *p_r = CVec::Zero(m);
  *p_t = CVec::Zero(m);
  CMat gw(m, k);
  for (int j = 0; j < k; ++j) gw.col(j) = ch.g * w.column(j);

  for (int p = 0; p < kr; ++p) {
    const double weight = mu[p] * std::norm(nu[p]);
    for (int j = 0; j < k; ++j) {
      const CVec a = (ch.h_r.col(p).array() *
                      (ios.phi_r.array() * gw.col(j).array()).conjugate())
                         .matrix();
      h_r->noalias() += weight * (a * a.adjoint());
      const cplx direct = ch.h_d.col(p).dot(w.column(j));
      *p_r -= weight * direct * a;
      if (j == p) *p_r += mu[p] * nu[p] * a;
    }
  }
  for (int q = 0; q < ch.k_t(); ++q) {
    const int user = kr + q;
    const double weight = mu[user] * std::norm(nu[user]);
    for (int j = 0; j < k; ++j) {
      const CVec b = (ch.h_t.col(q).array() *
                      (ios.phi_t.array() * gw.col(j).array()).conjugate())
                         .matrix();
      h_t->noalias() += weight * (b * b.adjoint());
      if (j == user) *p_t += mu[user] * nu[user] * b;
    }
  }
}

RVec sweep_energy_split(const CMat& h_r, const CVec& p_r, const CMat& h_t,
                        const CVec& p_t, const RVec& zeta0, double tol,
                        int max_sweeps, int root_scan_points) {
  const int m = static_cast<int>(zeta0.size());
  RVec zeta = zeta0;
  RVec eta = (1.0 - zeta.array().square()).max(0.0).sqrt();
  if (m == 0) return zeta;

  auto objective = [&]() {
    const CVec zc = zeta.cast<cplx>(), ec = eta.cast<cplx>();
    return std::real(cplx(zc.dot(h_r * zc))) -
           2.0 * std::real(cplx(zc.dot(p_r))) +
           std::real(cplx(ec.dot(h_t * ec))) -
           2.0 * std::real(cplx(ec.dot(p_t)));
  };

  double prev = objective();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < m; ++i) {
      cplx cr = 0.0, ct = 0.0;
      for (int n = 0; n < m; ++n) {
        if (n == i) continue;
        cr += h_r(i, n) * zeta[n];
        ct += h_t(i, n) * eta[n];
      }
      const double d1 = 2.0 * std::real(cr - p_r[i]);
      const double d2 = 2.0 * std::real(ct - p_t[i]);
      const double d3 = std::real(h_r(i, i));
      const double d4 = std::real(h_t(i, i));

      auto g = [&](double x) {
        const double e = std::sqrt(std::max(0.0, 1.0 - x * x));
        return d1 * x + d2 * e + d3 * x * x + d4 * (1.0 - x * x);
      };
      auto stat = [&](double x) {
        // derivative of g without the sqrt singularity at x = 1
        return 2.0 * (d3 - d4) * x + d1 -
               d2 * x / std::sqrt(std::max(1e-300, 1.0 - x * x));
      };

      double best_x = zeta[i];
      double best_v = g(best_x);
      auto consider = [&](double x) {
        const double v = g(x);
        if (v < best_v) {
          best_v = v;
          best_x = x;
        }
      };
      consider(0.0);
      consider(1.0);
      // bracket interior stationary points away from the singular endpoint
      const double upper = 1.0 - 1e-8;
      double xa = 0.0, fa = stat(xa);
      for (int s = 1; s < root_scan_points; ++s) {
        const double xb = upper * s / (root_scan_points - 1);
        const double fb = stat(xb);
        if (fa == 0.0) consider(xa);
        if (fa * fb < 0.0) {
          double lo = xa, hi = xb;
          for (int b = 0; b < 80; ++b) {
            const double mid = 0.5 * (lo + hi);
            if (stat(lo) * stat(mid) <= 0.0)
              hi = mid;
            else
              lo = mid;
          }
          consider(0.5 * (lo + hi));
        }
        xa = xb;
        fa = fb;
      }

      zeta[i] = best_x;
      eta[i] = std::sqrt(std::max(0.0, 1.0 - best_x * best_x));
    }
    const double cur = objective();
    if (std::abs(prev - cur) <= tol * std::max(1.0, std::abs(prev))) break;
    prev = cur;
  }
  return zeta;
}

SolveReport solve_sum_rate(const ChannelSet& ch, const SystemConfig& cfg,
                           const SumRateOptions& opts, const SrBlocks& blocks,
                           std::optional<IosState> warm_ios,
                           std::optional<Beamformers> warm_w) {
  cfg.validate();
  ch.validate();
  const int k = cfg.users_total();

  SolveReport rep;
  IosState state = warm_ios.has_value() ? *warm_ios : bootstrap_ios(ch, cfg);

  Beamformers w;
  if (warm_w.has_value()) {
    w = *warm_w;
  } else {
    // matched filters on the composite channels, filling the budget
    w = Beamformers::zeros(cfg.n_tx, cfg.k_r, cfg.k_t);
    const CMat comp = composite_all(ch, state);
    int active = 0;
    for (int u = 0; u < k; ++u)
      if (comp.col(u).norm() > 0) ++active;
    const double per = active > 0 ? cfg.power_budget / active : 0.0;
    for (int u = 0; u < k; ++u) {
      const double nrm = comp.col(u).norm();
      if (nrm == 0) continue;
      const CVec col = std::sqrt(per) * comp.col(u) / nrm;
      if (u < cfg.k_r)
        w.w_r.col(u) = col;
      else
        w.w_t.col(u - cfg.k_r) = col;
    }
  }

  double rate = sum_rate(ch, state, w, cfg.noise_r, cfg.noise_t);
  rep.objective_trace.push_back(rate);
  // surrogate at its (nu, mu) minimum: K - sum ln(1 + sinr)
  rep.aux_trace.push_back(k - rate * M_LN2);
  if (opts.record_iterates) rep.iterates.push_back(state);

  double surrogate_prev = rep.aux_trace[0];
  rep.status = SolveStatus::MaxIters;
  for (int it = 1; it <= opts.outer_max_iters; ++it) {
    const CVec nu =
        update_rx_scalars(ch, state, w, cfg.noise_r, cfg.noise_t);
    const RVec mse = mse_all(ch, state, w, nu, cfg.noise_r, cfg.noise_t);
    const RVec mu = weights_from_mse(mse);

    const BeamUpdate bu = update_beamformers(
        composite_all(ch, state), nu, mu, cfg.k_r, cfg.power_budget,
        opts.power_bisection_rel_tol);
    w = bu.w;
    if (bu.ridged) rep.notes.push_back("ridge fallback in the precoder block");

    if (blocks.phases && ch.n_elements() > 0 && state.mode != Mode::None) {
      CMat e_mat;
      CVec f_vec;
      if (cfg.k_r > 0) {
        build_phase_quadratic(ch, state, w, nu, mu, true, &e_mat, &f_vec);
        state.phi_r = sweep_phases(e_mat, f_vec, state.phi_r,
                                   opts.inner_sweep_tol, opts.inner_max_sweeps);
      }
      if (cfg.k_t > 0) {
        build_phase_quadratic(ch, state, w, nu, mu, false, &e_mat, &f_vec);
        state.phi_t = sweep_phases(e_mat, f_vec, state.phi_t,
                                   opts.inner_sweep_tol, opts.inner_max_sweeps);
      }
    }
    if (blocks.zeta && ch.n_elements() > 0 && state.mode != Mode::None) {
      CMat h_r, h_t;
      CVec p_r, p_t;
      build_energy_quadratic(ch, state, w, nu, mu, &h_r, &p_r, &h_t, &p_t);
      state.zeta =
          sweep_energy_split(h_r, p_r, h_t, p_t, state.zeta,
                             opts.inner_sweep_tol, opts.inner_max_sweeps,
                             opts.root_scan_points);
    }

    // surrogate at the cycle end, with this cycle's (nu, mu); natural log
    // so that mu = 1/MSE is the exact minimizer of the mu block
    const RVec mse_end = mse_all(ch, state, w, nu, cfg.noise_r, cfg.noise_t);
    double surrogate = 0.0;
    for (int u = 0; u < k; ++u)
      surrogate += mu[u] * mse_end[u] - std::log(mu[u]);

    rate = sum_rate(ch, state, w, cfg.noise_r, cfg.noise_t);
    rep.objective_trace.push_back(rate);
    rep.aux_trace.push_back(surrogate);
    rep.iterations = it;
    if (opts.record_iterates) rep.iterates.push_back(state);

    if (std::abs(surrogate_prev - surrogate) <=
        opts.outer_rel_tol * std::max(1.0, std::abs(surrogate_prev))) {
      rep.status = SolveStatus::Converged;
      surrogate_prev = surrogate;
      break;
    }
    surrogate_prev = surrogate;
  }
  rep.beams = w;
  rep.ios = state;
  return rep;
}

}  // namespace iosim
