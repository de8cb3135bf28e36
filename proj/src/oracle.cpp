#include "iosim/oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace iosim::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uplink powers (x, y) = (q1 g1, q2 g2) solving the two-user duality fixed
/// point at equality:
///   x (1 + (1-rho) y) = t1 (1 + y),  y (1 + (1-rho) x) = t2 (1 + x).
bool two_user_uplink(double rho, double t1, double t2, double* x, double* y) {
  const double gbar = 1.0 - rho;
  if (gbar <= 0.0) {
    if (t1 * t2 >= 1.0) return false;
    *y = t2 * (1.0 + t1) / (1.0 - t1 * t2);
    *x = t1 * (1.0 + *y);
    return true;
  }
  const double a = gbar * (1.0 + t1);
  const double b = 1.0 + gbar * (t1 - t2) - t1 * t2;
  const double c = -t2 * (1.0 + t1);
  const double disc = b * b - 4.0 * a * c;
  *y = (-b + std::sqrt(disc)) / (2.0 * a);
  *x = t1 * (1.0 + *y) / (1.0 + gbar * *y);
  return *x >= 0 && *y >= 0;
}

}  // namespace

double two_user_min_power(double g1, double g2, double rho, double t1,
                          double t2) {
  if (g1 <= 0 || g2 <= 0) return kInf;
  double x, y;
  if (!two_user_uplink(std::min(std::max(rho, 0.0), 1.0), t1, t2, &x, &y))
    return kInf;
  return x / g1 + y / g2;
}

namespace {

/// Two-user weighted-MMSE descent on the real plane. With channels reduced
/// to c1 = (s1, 0), c2 = (s2 sqrt(rho), s2 sqrt(1-rho)) and real starting
/// beams, every iterate stays real, so plain 2x2 arithmetic suffices.
double wmmse_rate_from(double g1, double g2, double rho, double budget,
                       std::array<double, 4> w0) {
  const double s1 = std::sqrt(g1), s2 = std::sqrt(g2);
  const double c1x = s1, c1y = 0.0;
  const double c2x = s2 * std::sqrt(rho), c2y = s2 * std::sqrt(1.0 - rho);

  double w1x = w0[0], w1y = w0[1], w2x = w0[2], w2y = w0[3];
  double prev_obj = kInf;
  double rate = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double a11 = c1x * w1x + c1y * w1y, a12 = c1x * w2x + c1y * w2y;
    const double a21 = c2x * w1x + c2y * w1y, a22 = c2x * w2x + c2y * w2y;
    const double rx1 = a11 * a11 + a12 * a12 + 1.0;
    const double rx2 = a21 * a21 + a22 * a22 + 1.0;
    const double nu1 = a11 / rx1, nu2 = a22 / rx2;
    const double mse1 = 1.0 - a11 * a11 / rx1, mse2 = 1.0 - a22 * a22 / rx2;
    const double mu1 = 1.0 / mse1, mu2 = 1.0 / mse2;

    // H = mu1 (nu1 c1)(nu1 c1)^T + mu2 (nu2 c2)(nu2 c2)^T
    const double h1x = nu1 * c1x, h1y = nu1 * c1y;
    const double h2x = nu2 * c2x, h2y = nu2 * c2y;
    const double hxx = mu1 * h1x * h1x + mu2 * h2x * h2x;
    const double hxy = mu1 * h1x * h1y + mu2 * h2x * h2y;
    const double hyy = mu1 * h1y * h1y + mu2 * h2y * h2y;

    // eigen-decomposition of the symmetric 2x2
    const double tr = hxx + hyy;
    const double det = hxx * hyy - hxy * hxy;
    const double gap = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double d1 = tr / 2.0 + gap, d2 = std::max(0.0, tr / 2.0 - gap);
    double vx, vy;  // eigenvector of d1
    if (std::abs(hxy) > 1e-300) {
      vx = d1 - hyy;
      vy = hxy;
    } else if (hxx >= hyy) {
      vx = 1.0;
      vy = 0.0;
    } else {
      vx = 0.0;
      vy = 1.0;
    }
    const double vn = std::hypot(vx, vy);
    vx /= vn;
    vy /= vn;
    // projections of mu_k hbar_k onto the eigenbasis {v, v_perp}
    const double b1v = mu1 * (h1x * vx + h1y * vy);
    const double b1p = mu1 * (-h1x * vy + h1y * vx);
    const double b2v = mu2 * (h2x * vx + h2y * vy);
    const double b2p = mu2 * (-h2x * vy + h2y * vx);
    const double m1 = b1v * b1v + b2v * b2v;  // mass on d1
    const double m2 = b1p * b1p + b2p * b2p;  // mass on d2

    auto power_at = [&](double lam) {
      const double e1 = d1 + lam, e2 = d2 + lam;
      double p = 0.0;
      p += e1 > 0 ? m1 / (e1 * e1) : kInf;
      p += e2 > 0 ? m2 / (e2 * e2) : kInf;
      return p;
    };
    double lam = 0.0;
    const bool null_mass = d2 <= 1e-14 * std::max(1.0, d1) && m2 > 1e-30;
    if (null_mass || power_at(0.0) > budget) {
      double lo = 0.0, hi = 1.0;
      while (power_at(hi) > budget && hi < 1e30) {
        lo = hi;
        hi *= 2.0;
      }
      for (int b = 0; b < 120; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (power_at(mid) > budget)
          lo = mid;
        else
          hi = mid;
      }
      lam = hi;
    }
    const double e1 = d1 + lam, e2 = std::max(d2 + lam, 1e-12);
    // w_k = (b_kv / e1) v + (b_kp / e2) v_perp
    w1x = (b1v / e1) * vx - (b1p / e2) * vy;
    w1y = (b1v / e1) * vy + (b1p / e2) * vx;
    w2x = (b2v / e1) * vx - (b2p / e2) * vy;
    w2y = (b2v / e1) * vy + (b2p / e2) * vx;

    // rate and surrogate at the new beams
    const double n11 = c1x * w1x + c1y * w1y, n12 = c1x * w2x + c1y * w2y;
    const double n21 = c2x * w1x + c2y * w1y, n22 = c2x * w2x + c2y * w2y;
    const double g1s = n11 * n11 / (n12 * n12 + 1.0);
    const double g2s = n22 * n22 / (n21 * n21 + 1.0);
    rate = std::log2(1.0 + g1s) + std::log2(1.0 + g2s);
    const double mse1n = nu1 * nu1 * (n11 * n11 + n12 * n12 + 1.0) -
                         2.0 * nu1 * n11 + 1.0;
    const double mse2n = nu2 * nu2 * (n21 * n21 + n22 * n22 + 1.0) -
                         2.0 * nu2 * n22 + 1.0;
    const double obj = mu1 * mse1n - std::log2(mu1) + mu2 * mse2n -
                       std::log2(mu2);
    if (std::abs(prev_obj - obj) <= 1e-12 * std::max(1.0, std::abs(prev_obj)))
      break;
    prev_obj = obj;
  }
  return rate;
}

}  // namespace

double two_user_max_rate(double g1, double g2, double rho, double budget) {
  rho = std::min(std::max(rho, 0.0), 1.0);
  const bool u1 = g1 > 1e-300, u2 = g2 > 1e-300;
  if (!u1 && !u2) return 0.0;
  if (!u2) return std::log2(1.0 + budget * g1);
  if (!u1) return std::log2(1.0 + budget * g2);

  const double s1 = std::sqrt(g1), s2 = std::sqrt(g2);
  const double c2x = s2 * std::sqrt(rho), c2y = s2 * std::sqrt(1.0 - rho);
  const double half = std::sqrt(budget / 2.0);

  double best = 0.0;
  // matched start
  best = std::max(best, wmmse_rate_from(g1, g2, rho, budget,
                                        {half, 0.0, half * c2x / s2,
                                         half * c2y / s2}));
  // orthogonalized start (zero-forcing flavored)
  if (c2y > 1e-12 * s2) {
    best = std::max(
        best, wmmse_rate_from(g1, g2, rho, budget, {half, 0.0, 0.0, half}));
  }
  // single-user starts: all power to one side
  const double full = std::sqrt(budget);
  best = std::max(best,
                  wmmse_rate_from(g1, g2, rho, budget, {full, 0.0, 0.0, 0.0}));
  best = std::max(best, wmmse_rate_from(g1, g2, rho, budget,
                                        {0.0, 0.0, full * c2x / s2,
                                         full * c2y / s2}));
  // time-sharing floors the descent results
  best = std::max(best, std::log2(1.0 + budget * g1));
  best = std::max(best, std::log2(1.0 + budget * g2));
  return best;
}

namespace {

struct Bucket {
  double best_gr = -1.0;  // max g_r seen
  double kept_gr = 0.0, kept_gt = 0.0, kept_rho = 0.0;  // achieved triple
};

}  // namespace

TinyGridResult tiny_joint_grid(const ChannelSet& ch, const SystemConfig& cfg,
                               bool want_pm, bool want_sr) {
  if (ch.n_tx() != 2 || ch.n_elements() != 2 || ch.k_r() != 1 ||
      ch.k_t() != 1)
    throw std::invalid_argument(
        "tiny_joint_grid: needs n_tx = 2, M = 2, K_r = K_t = 1");

  constexpr int kPhase = 100;   // 2*pi / 100 spacing
  constexpr int kAmp = 101;     // 0.01 spacing on [0, 1]
  constexpr int kBins = 512;

  const double t1 = cfg.target_of(0), t2 = cfg.target_of(1);
  const double isr = 1.0 / std::sqrt(cfg.noise_r);
  const double ist = 1.0 / std::sqrt(cfg.noise_t);

  // unit-noise cascade vectors: c_r = conj(phi_r1) z1 p1 + conj(phi_r2) z2 p2 + hd,
  // c_t = conj(phi_t1) e1 q1 + conj(phi_t2) e2 q2 (phases on the unit circle)
  const CVec gcol0 = ch.g.adjoint().col(0), gcol1 = ch.g.adjoint().col(1);
  const CVec p1 = isr * ch.h_r(0, 0) * gcol0;
  const CVec p2 = isr * ch.h_r(1, 0) * gcol1;
  const CVec hd = isr * ch.h_d.col(0);
  const CVec q1 = ist * ch.h_t(0, 0) * gcol0;
  const CVec q2 = ist * ch.h_t(1, 0) * gcol1;

  std::array<double, kPhase> cosT, sinT;
  std::array<cplx, kPhase> circle;
  for (int i = 0; i < kPhase; ++i) {
    const double a = 2.0 * M_PI * i / kPhase;
    cosT[i] = std::cos(a);
    sinT[i] = std::sin(a);
    circle[i] = cplx(cosT[i], sinT[i]);
  }
  std::array<double, kAmp> amp, amp_c;
  for (int i = 0; i < kAmp; ++i) {
    amp[i] = 0.01 * i;
    amp_c[i] = std::sqrt(std::max(0.0, 1.0 - amp[i] * amp[i]));
  }

  // global g_t ceiling for the bucket lattice
  const double gt_cap =
      std::pow(q1.norm() + q2.norm(), 2.0) * (1.0 + 1e-12) + 1e-300;

  TinyGridResult out;
  out.pm_min_power = kInf;
  std::vector<Bucket> buckets(want_sr ? kBins * kBins : 0);

  // coarse pre-pass seeds the incumbent so dominance pruning bites early
  double incumbent = kInf;
  if (want_pm) {
    for (int iz1 = 0; iz1 < kAmp; iz1 += 10)
      for (int iz2 = 0; iz2 < kAmp; iz2 += 10) {
        const CVec u1 = amp_c[iz1] * q1, u2 = amp_c[iz2] * q2;
        const cplx tcross = u2.dot(u1);  // u2^H u1
        const double gt0 = u1.squaredNorm() + u2.squaredNorm();
        for (int i1 = 0; i1 < kPhase; i1 += 10) {
          const CVec d = hd + std::conj(circle[i1]) * (amp[iz1] * p1);
          for (int i2 = 0; i2 < kPhase; i2 += 10) {
            const CVec cr = d + std::conj(circle[i2]) * (amp[iz2] * p2);
            const double gr = cr.squaredNorm();
            if (gr <= 0) continue;
            const cplx z1 = cr.dot(u1), z2 = cr.dot(u2);
            for (int it = 0; it < kPhase; it += 10) {
              const double gt =
                  gt0 + 2.0 * (tcross.real() * cosT[it] -
                               tcross.imag() * sinT[it]);
              if (gt <= 0) continue;
              const cplx cross = z1 + std::conj(circle[it]) * z2;
              const double rho = std::norm(cross) / (gr * gt);
              incumbent = std::min(
                  incumbent, two_user_min_power(gr, gt, rho, t1, t2));
            }
          }
        }
      }
  }

  const double bin_rho = kBins;            // rho in [0,1]
  const double bin_gt = kBins / gt_cap;    // g_t in [0, cap]

  for (int iz1 = 0; iz1 < kAmp; ++iz1) {
    for (int iz2 = 0; iz2 < kAmp; ++iz2) {
      const double z1a = amp[iz1], z2a = amp[iz2];
      const CVec u1 = amp_c[iz1] * q1, u2 = amp_c[iz2] * q2;
      const cplx tcross = u2.dot(u1);
      const double gt0 = u1.squaredNorm() + u2.squaredNorm();

      double gt_tab[kPhase], inv_gt_tab[kPhase], gt_max = 0.0;
      int gt_bin[kPhase];
      for (int i = 0; i < kPhase; ++i) {
        const double gt = gt0 + 2.0 * (tcross.real() * cosT[i] -
                                       tcross.imag() * sinT[i]);
        gt_tab[i] = gt;
        inv_gt_tab[i] = gt > 0 ? 1.0 / gt : 0.0;
        gt_max = std::max(gt_max, gt);
        int b = static_cast<int>(gt * bin_gt);
        gt_bin[i] = std::min(std::max(b, 0), kBins - 1);
      }

      const CVec a2 = z2a * p2;
      const double a2n = a2.squaredNorm();
      const cplx a2u1 = a2.dot(u1), a2u2 = a2.dot(u2);

      for (int i1 = 0; i1 < kPhase; ++i1) {
        const CVec d = hd + std::conj(circle[i1]) * (z1a * p1);
        const double dn = d.squaredNorm();
        const cplx a2d = a2.dot(d);  // a2^H d
        const cplx du1 = d.dot(u1), du2 = d.dot(u2);

        for (int i2 = 0; i2 < kPhase; ++i2) {
          const cplx x2 = circle[i2];
          const double gr =
              dn + a2n + 2.0 * (x2.real() * a2d.real() - x2.imag() * a2d.imag());
          if (gr <= 0) continue;
          const double inv_gr = 1.0 / gr;
          // cross(theta) = zc1 + e^{-i theta} zc2
          const cplx zc1 = du1 + x2 * a2u1;
          const cplx zc2 = du2 + x2 * a2u2;
          const double cc = std::norm(zc1) + std::norm(zc2);
          const cplx tmix = zc1 * std::conj(zc2);
          const double tre = 2.0 * tmix.real(), tim = 2.0 * tmix.imag();

          if (want_sr) {
            for (int it = 0; it < kPhase; ++it) {
              const double x = cc + tre * cosT[it] - tim * sinT[it];
              const double rho = x * inv_gr * inv_gt_tab[it];
              int br = static_cast<int>(rho * bin_rho);
              br = std::min(std::max(br, 0), kBins - 1);
              Bucket& bk = buckets[br * kBins + gt_bin[it]];
              if (gr > bk.best_gr) {
                bk.best_gr = gr;
                bk.kept_gr = gr;
                bk.kept_gt = gt_tab[it];
                bk.kept_rho = rho;
              }
            }
          }

          if (want_pm) {
            // dominance bound: smallest rho with largest g_t
            const double x_min = std::max(0.0, cc - std::hypot(tre, tim));
            const double rho_lb =
                gt_max > 0 ? x_min * inv_gr / gt_max : 0.0;
            if (two_user_min_power(gr, gt_max, rho_lb, t1, t2) >= incumbent)
              continue;
            for (int it = 0; it < kPhase; ++it) {
              if (gt_tab[it] <= 0) continue;
              const double x = cc + tre * cosT[it] - tim * sinT[it];
              const double rho = x * inv_gr * inv_gt_tab[it];
              const double p = two_user_min_power(gr, gt_tab[it], rho, t1, t2);
              if (p < incumbent) incumbent = p;
            }
          }
          out.points += kPhase;
        }
      }
    }
  }
  out.pm_min_power = incumbent;

  if (want_sr) {
    double lb = 0.0, ub = 0.0;
    const double budget = cfg.power_budget;
    for (int br = 0; br < kBins; ++br)
      for (int bt = 0; bt < kBins; ++bt) {
        const Bucket& bk = buckets[br * kBins + bt];
        if (bk.best_gr < 0) continue;
        lb = std::max(lb, two_user_max_rate(bk.kept_gr, bk.kept_gt,
                                            bk.kept_rho, budget));
        const double gt_hi = (bt + 1) / bin_gt;
        const double rho_lo = br / bin_rho;
        ub = std::max(ub, two_user_max_rate(bk.best_gr, gt_hi, rho_lo,
                                            budget));
      }
    out.sr_lower = lb;
    out.sr_upper = ub;
  }
  return out;
}

}  // namespace iosim::oracle
