#include <doctest.h>

#include "iosim/model.hpp"
#include "iosim/power_min.hpp"
#include "test_util.hpp"

using namespace iosim;
using namespace iosim::testutil;

namespace {

double worst_margin(const ChannelSet& ch, const IosState& ios,
                    const Beamformers& w, const SystemConfig& cfg, int begin,
                    int end) {
  const RVec s = sinr_all(ch, ios, w, cfg.noise_r, cfg.noise_t);
  double worst = 0.0;
  for (int u = begin; u < end; ++u)
    worst = std::max(worst, cfg.target_of(u) / std::max(s[u], 1e-300));
  return worst;
}

double min_margin(const ChannelSet& ch, const IosState& ios,
                  const Beamformers& w, const SystemConfig& cfg) {
  const RVec s = sinr_all(ch, ios, w, cfg.noise_r, cfg.noise_t);
  double m = 1e300;
  for (int u = 0; u < s.size(); ++u)
    m = std::min(m, s[u] / cfg.target_of(u));
  return m;
}

}  // namespace

TEST_CASE("reflect phase design is a no-op without reflected users") {
  Philox rng(1);
  const ChannelSet ch = random_channels(rng, 2, 3, 0, 2);
  const IosState ios = random_ios(rng, 3);
  const Beamformers w = random_beams(rng, 2, 0, 2);
  const SystemConfig cfg = unit_config(2, 3, 0, 2);
  const CVec phi = design_reflect_phases(ch, ios, w, cfg);
  CHECK((phi - ios.phi_r).norm() == 0.0);
}

TEST_CASE("transmit phase design is a no-op without transmitted users") {
  Philox rng(2);
  const ChannelSet ch = random_channels(rng, 2, 3, 2, 0);
  const IosState ios = random_ios(rng, 3);
  const Beamformers w = random_beams(rng, 2, 2, 0);
  const SystemConfig cfg = unit_config(2, 3, 2, 0);
  const CVec phi = design_transmit_phases(ch, ios, w, cfg);
  CHECK((phi - ios.phi_t).norm() == 0.0);
}

TEST_CASE("residual terms reproduce the ratio residual at the current point") {
  Philox rng(3);
  for (int t = 0; t < 10; ++t) {
    const int m = 3, kr = 2, kt = 1, nt = 3;
    const ChannelSet ch = random_channels(rng, nt, m, kr, kt);
    const IosState ios = random_ios(rng, m);
    const Beamformers w = random_beams(rng, nt, kr, kt);
    SystemConfig cfg = unit_config(nt, m, kr, kt, 0.8, 0.0);
    cfg.sinr_targets_r = RVec::Constant(kr, 2.5);
    cfg.sinr_targets_t = RVec::Constant(kt, 1.5);
    cfg.noise_t = 1.3;
    const double lambda = 0.7;

    for (const bool reflect_side : {true, false}) {
      const auto terms =
          phase_design_terms(ch, ios, w, cfg, reflect_side, lambda);
      const CVec phi = reflect_side ? ios.phi_r : ios.phi_t;
      const int k_side = reflect_side ? kr : kt;
      const double sigma2 = reflect_side ? cfg.noise_r : cfg.noise_t;
      for (int k = 0; k < k_side; ++k) {
        const int user = reflect_side ? k : kr + k;
        const CVec c = composite_channel(ch, ios, user);
        double interf = 0.0, signal = 0.0;
        for (int j = 0; j < kr + kt; ++j) {
          const double p = std::norm(cplx(c.dot(w.column(j))));
          if (j == user)
            signal = p;
          else
            interf += p;
        }
        const double expect =
            cfg.target_of(user) * (interf + sigma2) - lambda * signal;
        const double got = quadratic_value(terms[k], phi);
        CHECK(std::abs(got - expect) <=
              1e-10 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("single element, single user: phase design reaches the grid value") {
  // no direct path: the margin is phase-invariant, values must agree with a
  // 1e-3 rad scan; with a direct path the optimum aligns both contributions
  Philox rng(4);
  for (const bool with_direct : {false, true}) {
    ChannelSet ch = random_channels(rng, 1, 1, 1, 0);
    if (!with_direct) ch.h_d.setZero();
    IosState ios = random_ios(rng, 1);
    Beamformers w = Beamformers::zeros(1, 1, 0);
    w.w_r(0, 0) = 1.0;
    SystemConfig cfg = unit_config(1, 1, 1, 0, 1.0, 1.0);

    const CVec phi = design_reflect_phases(ch, ios, w, cfg);
    IosState opt = ios;
    opt.phi_r = phi;
    const double achieved = worst_margin(ch, opt, w, cfg, 0, 1);

    double best = 1e300;
    for (int i = 0; i < 6284; ++i) {
      IosState cand = ios;
      cand.phi_r[0] = std::polar(1.0, 2.0 * M_PI * i / 6284.0);
      best = std::min(best, worst_margin(ch, cand, w, cfg, 0, 1));
    }
    CHECK(achieved <= best * (1.0 + 1e-3));
  }
}

TEST_CASE("single element, single transmitted user: grid value agreement") {
  Philox rng(5);
  ChannelSet ch = random_channels(rng, 1, 1, 0, 1);
  IosState ios = random_ios(rng, 1);
  Beamformers w = Beamformers::zeros(1, 0, 1);
  w.w_t(0, 0) = 1.0;
  SystemConfig cfg = unit_config(1, 1, 0, 1, 1.0, 1.0);

  const CVec phi = design_transmit_phases(ch, ios, w, cfg);
  IosState opt = ios;
  opt.phi_t = phi;
  const double achieved = worst_margin(ch, opt, w, cfg, 0, 1);
  double best = 1e300;
  for (int i = 0; i < 6284; ++i) {
    IosState cand = ios;
    cand.phi_t[0] = std::polar(1.0, 2.0 * M_PI * i / 6284.0);
    best = std::min(best, worst_margin(ch, cand, w, cfg, 0, 1));
  }
  CHECK(achieved <= best * (1.0 + 1e-3));
}

TEST_CASE("phase design never worsens the worst margin") {
  Philox rng(6);
  for (int t = 0; t < 15; ++t) {
    const int nt = 2 + static_cast<int>(rng.next_u32() % 2);
    const int m = 1 + static_cast<int>(rng.next_u32() % 5);
    const int kr = 1 + static_cast<int>(rng.next_u32() % 2);
    const int kt = static_cast<int>(rng.next_u32() % 2);
    const ChannelSet ch = random_channels(rng, nt, m, kr, kt);
    const IosState ios = random_ios(rng, m);
    const Beamformers w = random_beams(rng, nt, kr, kt);
    SystemConfig cfg = unit_config(nt, m, kr, kt, 0.5, 0.0);
    cfg.sinr_targets_r = RVec::Constant(kr, 2.0);
    cfg.sinr_targets_t = RVec::Constant(kt, 2.0);

    const double before_r = worst_margin(ch, ios, w, cfg, 0, kr);
    IosState after = ios;
    after.phi_r = design_reflect_phases(ch, ios, w, cfg);
    CHECK(worst_margin(ch, after, w, cfg, 0, kr) <= before_r * (1 + 1e-12));

    if (kt > 0) {
      const double before_t = worst_margin(ch, after, w, cfg, kr, kr + kt);
      IosState after_t = after;
      after_t.phi_t = design_transmit_phases(ch, after, w, cfg);
      CHECK(worst_margin(ch, after_t, w, cfg, kr, kr + kt) <=
            before_t * (1 + 1e-12));
    }
  }
}

TEST_CASE("energy split: all reflection when only reflected users exist") {
  // aligned single-user cascade, no direct path: the sinr grows with zeta
  ChannelSet ch;
  ch.g = CMat::Ones(2, 1);
  ch.h_d = CMat::Zero(1, 1);
  ch.h_r = CMat::Ones(2, 1);
  ch.h_t = CMat::Zero(2, 0);
  IosState ios = IosState::neutral(2);
  Beamformers w = Beamformers::zeros(1, 1, 0);
  w.w_r(0, 0) = 1.0;
  const SystemConfig cfg = unit_config(1, 2, 1, 0, 1.0, 1.0);
  const RVec zeta = design_energy_split(ch, ios, w, cfg);
  CHECK(zeta[0] == doctest::Approx(1.0));
  CHECK(zeta[1] == doctest::Approx(1.0));
}

TEST_CASE("energy split: all transmission when only transmitted users exist") {
  ChannelSet ch;
  ch.g = CMat::Ones(2, 1);
  ch.h_d = CMat::Zero(1, 0);
  ch.h_r = CMat::Zero(2, 0);
  ch.h_t = CMat::Ones(2, 1);
  IosState ios = IosState::neutral(2);
  Beamformers w = Beamformers::zeros(1, 0, 1);
  w.w_t(0, 0) = 1.0;
  const SystemConfig cfg = unit_config(1, 2, 0, 1, 1.0, 1.0);
  const RVec zeta = design_energy_split(ch, ios, w, cfg);
  CHECK(zeta[0] == doctest::Approx(0.0));
  CHECK(zeta[1] == doctest::Approx(0.0));
}

TEST_CASE("energy split: symmetric single-element case balances at 1/sqrt(2)") {
  ChannelSet ch;
  ch.g = CMat::Ones(1, 1);
  ch.h_d = CMat::Zero(1, 1);
  ch.h_r = CMat::Ones(1, 1);
  ch.h_t = CMat::Ones(1, 1);
  IosState ios = IosState::neutral(1);
  ios.zeta[0] = 0.3;  // start away from the answer
  Beamformers w = Beamformers::zeros(1, 1, 1);
  w.w_r(0, 0) = 1.0;
  w.w_t(0, 0) = 1.0;
  const SystemConfig cfg = unit_config(1, 1, 1, 1, 1.0, 1.0);

  const RVec zeta = design_energy_split(ch, ios, w, cfg);

  // scan oracle on the true min-margin objective
  double best_x = -1.0, best_v = -1e300;
  for (int i = 0; i <= 10000; ++i) {
    IosState cand = ios;
    cand.zeta[0] = i / 10000.0;
    const double v = min_margin(ch, cand, w, cfg);
    if (v > best_v) {
      best_v = v;
      best_x = cand.zeta[0];
    }
  }
  CHECK(best_x == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(zeta[0] == doctest::Approx(best_x).epsilon(1e-3));
}

TEST_CASE("energy split never lowers the min margin") {
  Philox rng(7);
  for (int t = 0; t < 15; ++t) {
    const int nt = 2, m = 1 + static_cast<int>(rng.next_u32() % 4);
    const int kr = 1 + static_cast<int>(rng.next_u32() % 2);
    const int kt = 1 + static_cast<int>(rng.next_u32() % 2);
    const ChannelSet ch = random_channels(rng, nt, m, kr, kt);
    const IosState ios = random_ios(rng, m);
    const Beamformers w = random_beams(rng, nt, kr, kt);
    SystemConfig cfg = unit_config(nt, m, kr, kt, 0.7, 0.0);
    cfg.sinr_targets_r = RVec::Constant(kr, 1.2);
    cfg.sinr_targets_t = RVec::Constant(kt, 0.8);

    const double before = min_margin(ch, ios, w, cfg);
    IosState after = ios;
    after.zeta = design_energy_split(ch, ios, w, cfg);
    after.validate();
    CHECK(min_margin(ch, after, w, cfg) >= before * (1 - 1e-9));
  }
}

TEST_CASE("power minimization: monotone trace, met constraints") {
  Philox rng(8);
  int solved = 0;
  for (int t = 0; t < 8; ++t) {
    const int nt = 3, m = 4, kr = 2, kt = 1;
    SystemConfig cfg = unit_config(nt, m, kr, kt, 0.2, 0.0);
    cfg.sinr_targets_r = RVec::Constant(kr, 3.0);
    cfg.sinr_targets_t = RVec::Constant(kt, 3.0);
    cfg.seed = 100 + t;
    const ChannelSet ch = random_channels(rng, nt, m, kr, kt);

    PowerMinOptions opts;
    opts.record_iterates = true;
    const SolveReport rep = solve_power_min(ch, cfg, opts);
    if (rep.status == SolveStatus::Infeasible) continue;
    ++solved;

    REQUIRE(rep.objective_trace.size() ==
            static_cast<std::size_t>(rep.iterations) + 1);
    for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
      CHECK(rep.objective_trace[i] <=
            rep.objective_trace[i - 1] + 1e-9 * rep.objective_trace[i - 1]);

    const RVec s = sinr_all(ch, rep.ios, rep.beams, cfg.noise_r, cfg.noise_t);
    for (int u = 0; u < s.size(); ++u)
      CHECK(s[u] >= cfg.target_of(u) * (1.0 - 1e-6));

    for (const IosState& it : rep.iterates) it.validate();
  }
  CHECK(solved >= 5);
}

TEST_CASE("power minimization reports infeasible when a user is unreachable") {
  Philox rng(9);
  ChannelSet ch = random_channels(rng, 2, 3, 1, 1);
  ch.h_t.setZero();  // transmitted user fully blocked
  SystemConfig cfg = unit_config(2, 3, 1, 1, 1.0, 1.0);
  const SolveReport rep = solve_power_min(ch, cfg);
  CHECK(rep.status == SolveStatus::Infeasible);
  CHECK(rep.objective_trace.empty());
}
