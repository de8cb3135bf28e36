#include "iosim/power_min.hpp"

#include <cmath>

#include "iosim/model.hpp"
#include "iosim/rng.hpp"

namespace iosim {

namespace {

constexpr double kTinyGamma = 1e-30;

/// Worst target/SINR ratio over a user slice [begin, end).
double worst_ratio(const RVec& sinr, const SystemConfig& cfg, int begin,
                   int end) {
  double worst = 0.0;
  for (int u = begin; u < end; ++u)
    worst = std::max(worst,
                     cfg.target_of(u) / std::max(sinr[u], kTinyGamma));
  // a vanished signal would otherwise overflow the residual quadratics
  return std::min(worst, 1e15);
}

}  // namespace

std::vector<QuadraticTerm> phase_design_terms(const ChannelSet& ch,
                                              const IosState& ios,
                                              const Beamformers& w,
                                              const SystemConfig& cfg,
                                              bool reflect_side,
                                              double lambda) {
  const int m = ch.n_elements();
  const int k_side = reflect_side ? cfg.k_r : cfg.k_t;
  const int k_all = cfg.users_total();
  const RVec amp = reflect_side ? RVec(ios.zeta) : RVec(ios.eta());
  const double sigma2 = reflect_side ? cfg.noise_r : cfg.noise_t;

  CMat gw(m, k_all);
  for (int j = 0; j < k_all; ++j) gw.col(j) = ch.g * w.column(j);

  std::vector<QuadraticTerm> terms;
  terms.reserve(k_side);
  for (int k = 0; k < k_side; ++k) {
    const int own_beam = reflect_side ? k : cfg.k_r + k;
    const CVec h = reflect_side ? CVec(ch.h_r.col(k)) : CVec(ch.h_t.col(k));
    const double target = cfg.target_of(own_beam);
    QuadraticTerm q;
    q.vectors.resize(m, k_all);
    q.scales.resize(k_all);
    q.linear = CVec::Zero(m);
    q.offset = target * sigma2;
    for (int j = 0; j < k_all; ++j) {
      q.vectors.col(j) =
          (h.array() * amp.array() * gw.col(j).conjugate().array()).matrix();
      const cplx hbar =
          reflect_side ? cplx(ch.h_d.col(k).dot(w.column(j))) : cplx(0.0);
      q.scales[j] = (j == own_beam) ? -lambda : target;
      q.linear += q.scales[j] * hbar * q.vectors.col(j);
      q.offset += q.scales[j] * std::norm(hbar);
    }
    terms.push_back(std::move(q));
  }
  return terms;
}

namespace {

/// One ratio-descent pass over a phase vector. Residuals are
/// rescaled to unit spread before smoothing so the temperature floor applies
/// to O(1) values regardless of the physical power scale.
CVec design_phases_side(const ChannelSet& ch, const IosState& ios,
                        const Beamformers& w, const SystemConfig& cfg,
                        bool reflect_side, const PowerMinOptions& opts) {
  const int k_side = reflect_side ? cfg.k_r : cfg.k_t;
  CVec phi = reflect_side ? ios.phi_r : ios.phi_t;
  if (k_side == 0 || ch.n_elements() == 0) return phi;

  const int begin = reflect_side ? 0 : cfg.k_r;
  const int end = reflect_side ? cfg.k_r : cfg.users_total();

  IosState state = ios;
  auto ratio_at = [&](const CVec& cand) {
    (reflect_side ? state.phi_r : state.phi_t) = cand;
    const RVec s = sinr_all(ch, state, w, cfg.noise_r, cfg.noise_t);
    return worst_ratio(s, cfg, begin, end);
  };

  double lambda = ratio_at(phi);
  for (int round = 0; round < opts.dinkelbach_max_rounds; ++round) {
    auto terms = phase_design_terms(ch, state, w, cfg, reflect_side, lambda);

    // normalize by the term-component magnitude (the residuals themselves
    // cancel to ~0 whenever every constraint is active)
    double scale = 1e-300;
    for (const auto& q : terms) {
      scale = std::max(scale, std::abs(q.offset));
      scale = std::max(scale, q.linear.norm());
      for (int j = 0; j < q.scales.size(); ++j)
        scale = std::max(scale,
                         std::abs(q.scales[j]) * q.vectors.col(j).squaredNorm());
    }
    RVec f(k_side);
    for (int k = 0; k < k_side; ++k) f[k] = quadratic_value(terms[k], phi);
    const double spread = f.maxCoeff() - f.minCoeff();
    for (auto& q : terms) {
      q.scales /= scale;
      q.linear /= scale;
      q.offset /= scale;
    }
    const double eps = std::max(1e-6, 0.01 * spread / scale);

    const RcgResult res =
        rcg_minimize(make_lse_objective(std::move(terms), eps), phi, opts.rcg);
    const double cand_ratio = ratio_at(res.phi);
    if (cand_ratio <= lambda) {
      phi = res.phi;
    } else {
      (reflect_side ? state.phi_r : state.phi_t) = phi;  // reject candidate
      break;
    }
    if (std::abs(lambda - cand_ratio) < opts.dinkelbach_tol) {
      lambda = cand_ratio;
      break;
    }
    lambda = cand_ratio;
  }
  return phi;
}

double golden_section(const std::function<double(double)>& f, double a,
                      double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

CVec design_reflect_phases(const ChannelSet& ch, const IosState& ios,
                           const Beamformers& w, const SystemConfig& cfg,
                           const PowerMinOptions& opts) {
  return design_phases_side(ch, ios, w, cfg, true, opts);
}

CVec design_transmit_phases(const ChannelSet& ch, const IosState& ios,
                            const Beamformers& w, const SystemConfig& cfg,
                            const PowerMinOptions& opts) {
  return design_phases_side(ch, ios, w, cfg, false, opts);
}

RVec design_energy_split(const ChannelSet& ch, const IosState& ios,
                         const Beamformers& w, const SystemConfig& cfg,
                         const PowerMinOptions& opts) {
  const int m = ch.n_elements();
  if (m == 0) return ios.zeta;
  const int kr = cfg.k_r, kt = cfg.k_t, k = kr + kt;

  CMat gw(m, k);
  for (int j = 0; j < k; ++j) gw.col(j) = ch.g * w.column(j);

  // Per-element cascade slopes: received amplitude of (user, beam) is
  // affine in zeta_m (reflected side) or eta_m (transmitted side).
  std::vector<CMat> slope_r(kr), slope_t(kt);
  std::vector<CVec> amp_r(kr), amp_t(kt);  // current amplitudes, length k
  RVec zeta = ios.zeta;
  RVec eta = ios.eta();
  for (int p = 0; p < kr; ++p) {
    slope_r[p].resize(m, k);
    for (int j = 0; j < k; ++j)
      slope_r[p].col(j) = (ch.h_r.col(p).conjugate().array() *
                           ios.phi_r.array() * gw.col(j).array())
                              .matrix();
    amp_r[p] = slope_r[p].transpose() * CVec(zeta.cast<cplx>());
    for (int j = 0; j < k; ++j) amp_r[p][j] += ch.h_d.col(p).dot(w.column(j));
  }
  for (int q = 0; q < kt; ++q) {
    slope_t[q].resize(m, k);
    for (int j = 0; j < k; ++j)
      slope_t[q].col(j) = (ch.h_t.col(q).conjugate().array() *
                           ios.phi_t.array() * gw.col(j).array())
                              .matrix();
    amp_t[q] = slope_t[q].transpose() * CVec(eta.cast<cplx>());
  }

  auto margins_ratio = [&]() {
    double worst = 0.0;
    for (int p = 0; p < kr; ++p) {
      double interf = 0.0;
      for (int j = 0; j < k; ++j)
        if (j != p) interf += std::norm(amp_r[p][j]);
      const double gamma =
          std::norm(amp_r[p][p]) / (interf + cfg.noise_r);
      worst = std::max(worst, cfg.target_of(p) / std::max(gamma, kTinyGamma));
    }
    for (int q = 0; q < kt; ++q) {
      double interf = 0.0;
      for (int j = 0; j < k; ++j)
        if (j != kr + q) interf += std::norm(amp_t[q][j]);
      const double gamma =
          std::norm(amp_t[q][kr + q]) / (interf + cfg.noise_t);
      worst = std::max(worst,
                       cfg.target_of(kr + q) / std::max(gamma, kTinyGamma));
    }
    return worst;
  };

  double kappa = margins_ratio();
  for (int round = 0; round < opts.zeta_max_rounds; ++round) {
    for (int elem = 0; elem < m; ++elem) {
      // residual envelope as a function of x = zeta_elem
      auto envelope = [&](double x) {
        const double ex = std::sqrt(std::max(0.0, 1.0 - x * x));
        double worst = -1e300;
        for (int p = 0; p < kr; ++p) {
          const double dz = x - zeta[elem];
          double rx = 0.0, sig = 0.0;
          for (int j = 0; j < k; ++j) {
            const double a2 = std::norm(
                cplx(amp_r[p][j] + dz * slope_r[p](elem, j)));
            rx += a2;
            if (j == p) sig = a2;
          }
          const double target = cfg.target_of(p);
          worst = std::max(
              worst, target * (cfg.noise_r + rx - sig) - kappa * sig);
        }
        for (int q = 0; q < kt; ++q) {
          const double de = ex - eta[elem];
          double rx = 0.0, sig = 0.0;
          for (int j = 0; j < k; ++j) {
            const double a2 = std::norm(
                cplx(amp_t[q][j] + de * slope_t[q](elem, j)));
            rx += a2;
            if (j == kr + q) sig = a2;
          }
          const double target = cfg.target_of(kr + q);
          worst = std::max(
              worst, target * (cfg.noise_t + rx - sig) - kappa * sig);
        }
        return worst;
      };

      const int n = opts.zeta_scan_points;
      double best_x = zeta[elem];
      double best_v = envelope(best_x);
      int best_i = -1;
      for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        const double v = envelope(x);
        if (v < best_v) {
          best_v = v;
          best_x = x;
          best_i = i;
        }
      }
      if (best_i >= 0) {
        const double lo =
            std::max(0.0, static_cast<double>(best_i - 1) / (n - 1));
        const double hi =
            std::min(1.0, static_cast<double>(best_i + 1) / (n - 1));
        const double xr = golden_section(envelope, lo, hi, opts.bisection_tol);
        if (envelope(xr) < best_v) best_x = xr;
      }

      if (best_x != zeta[elem]) {
        const double new_eta = std::sqrt(std::max(0.0, 1.0 - best_x * best_x));
        const double dz = best_x - zeta[elem];
        const double de = new_eta - eta[elem];
        for (int p = 0; p < kr; ++p)
          amp_r[p] += dz * slope_r[p].row(elem).transpose();
        for (int q = 0; q < kt; ++q)
          amp_t[q] += de * slope_t[q].row(elem).transpose();
        zeta[elem] = best_x;
        eta[elem] = new_eta;
      }
    }
    const double kappa_new = margins_ratio();
    const bool done = std::abs(kappa - kappa_new) < opts.dinkelbach_tol;
    kappa = kappa_new;
    if (done) break;
  }
  return zeta;
}

CVec align_phases(const CVec& h_side, const CMat& g, const CVec& u) {
  const int m = static_cast<int>(h_side.size());
  CVec phi = CVec::Ones(m);
  const CVec gu = g * u;
  for (int i = 0; i < m; ++i) {
    const cplx z = std::conj(h_side[i]) * gu[i];
    const double mag = std::abs(z);
    if (mag > 0) phi[i] = std::conj(z) / mag;
  }
  return phi;
}

IosState bootstrap_ios(const ChannelSet& ch, const SystemConfig& cfg,
                       Mode mode) {
  IosState s = IosState::neutral(ch.n_elements(), mode);
  if (ch.n_elements() == 0 || mode == Mode::None) return s;
  if (cfg.k_r > 0) {
    int strongest = 0;
    for (int p = 1; p < cfg.k_r; ++p)
      if (ch.h_r.col(p).norm() > ch.h_r.col(strongest).norm()) strongest = p;
    CVec u = ch.h_d.col(strongest);
    if (u.norm() == 0.0) u = ch.g.adjoint() * ch.h_r.col(strongest);
    if (u.norm() == 0.0)
      u = CVec::Ones(cfg.n_tx);
    u /= u.norm();
    s.phi_r = align_phases(ch.h_r.col(strongest), ch.g, u);
  }
  if (cfg.k_t > 0) {
    int strongest = 0;
    for (int q = 1; q < cfg.k_t; ++q)
      if (ch.h_t.col(q).norm() > ch.h_t.col(strongest).norm()) strongest = q;
    CVec u = ch.g.adjoint() * ch.h_t.col(strongest);
    if (u.norm() == 0.0)
      u = CVec::Ones(cfg.n_tx);
    u /= u.norm();
    s.phi_t = align_phases(ch.h_t.col(strongest), ch.g, u);
  }
  return s;
}

SolveReport solve_power_min(const ChannelSet& ch, const SystemConfig& cfg,
                            const PowerMinOptions& opts,
                            const PmBlocks& blocks,
                            std::optional<IosState> warm_start) {
  cfg.validate();
  ch.validate();

  SolveReport rep;
  IosState state =
      warm_start.has_value() ? *warm_start : bootstrap_ios(ch, cfg);

  TxBeamResult bf = solve_tx_beamforming(ch, state, cfg, opts.feasibility_cap);
  for (int attempt = 0;
       !bf.feasible && attempt < opts.init_random_retries &&
       ch.n_elements() > 0 && state.mode != Mode::None;
       ++attempt) {
    Philox rng(cfg.seed, 0xF0000000ull + attempt);
    for (int i = 0; i < state.n_elements(); ++i) {
      state.phi_r[i] = std::polar(1.0, 2.0 * M_PI * rng.next_double());
      state.phi_t[i] = std::polar(1.0, 2.0 * M_PI * rng.next_double());
    }
    bf = solve_tx_beamforming(ch, state, cfg, opts.feasibility_cap);
  }
  if (!bf.feasible) {
    rep.status = SolveStatus::Infeasible;
    rep.ios = state;
    return rep;
  }

  rep.objective_trace.push_back(bf.power);
  rep.beams = bf.w;
  rep.ios = state;
  if (opts.record_iterates) rep.iterates.push_back(state);

  double prev = bf.power;
  rep.status = SolveStatus::MaxIters;
  for (int it = 1; it <= opts.outer_max_iters; ++it) {
    const IosState saved = state;
    if (blocks.phases_r)
      state.phi_r = design_reflect_phases(ch, state, rep.beams, cfg, opts);
    if (blocks.phases_t)
      state.phi_t = design_transmit_phases(ch, state, rep.beams, cfg, opts);
    if (blocks.zeta)
      state.zeta = design_energy_split(ch, state, rep.beams, cfg, opts);

    bf = solve_tx_beamforming(ch, state, cfg, opts.feasibility_cap);
    if (!bf.feasible) {
      // cannot happen when margins were preserved; keep the last good point
      state = saved;
      rep.notes.push_back("beamforming rejected an updated surface state");
      rep.status = SolveStatus::Converged;
      break;
    }
    rep.beams = bf.w;
    rep.ios = state;
    rep.objective_trace.push_back(bf.power);
    rep.iterations = it;
    if (opts.record_iterates) rep.iterates.push_back(state);

    if (std::abs(prev - bf.power) < opts.outer_rel_tol * prev) {
      rep.status = SolveStatus::Converged;
      break;
    }
    prev = bf.power;
  }
  return rep;
}

}  // namespace iosim
