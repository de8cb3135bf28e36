#include <doctest.h>

#include "iosim/model.hpp"
#include "test_util.hpp"

using namespace iosim;
using namespace iosim::testutil;

namespace {

ChannelSet direct_only(int nt, const CVec& h_d) {
  ChannelSet ch;
  ch.g = CMat::Zero(0, nt);
  ch.h_d = h_d;
  ch.h_r = CMat::Zero(0, 1);
  ch.h_t = CMat::Zero(0, 0);
  return ch;
}

}  // namespace

TEST_CASE("composite channel: degenerate empty surface is the direct path") {
  const int nt = 3;
  CVec e1 = CVec::Zero(nt);
  e1[0] = 1.0;
  const ChannelSet ch = direct_only(nt, e1);
  const IosState ios = IosState::neutral(0);
  const CVec c = composite_channel(ch, ios, 0);
  CHECK((c - e1).norm() == doctest::Approx(0.0));
}

TEST_CASE("composite channel: zeta = 0 kills the reflected surface path") {
  Philox rng(7);
  ChannelSet ch = random_channels(rng, 4, 6, 1, 1);
  IosState ios = random_ios(rng, 6);
  ios.zeta.setZero();
  const CVec c_r = composite_channel(ch, ios, 0);
  CHECK((c_r - ch.h_d.col(0)).norm() < 1e-14);
  // eta = 1: the transmitted path survives.
  const CVec c_t = composite_channel(ch, ios, 1);
  CHECK(c_t.norm() > 0.0);
}

TEST_CASE("composite channel: opposite-phase element cancels the direct path") {
  ChannelSet ch;
  ch.g = CMat::Constant(1, 1, 1.0);
  ch.h_d = CMat::Constant(1, 1, 1.0);
  ch.h_r = CMat::Constant(1, 1, 1.0);
  ch.h_t = CMat::Zero(1, 0);
  IosState ios;
  ios.phi_r = CVec::Constant(1, cplx(-1.0, 0.0));
  ios.phi_t = CVec::Ones(1);
  ios.zeta = RVec::Ones(1);
  const CVec c = composite_channel(ch, ios, 0);
  CHECK(std::abs(c[0]) < 1e-15);
}

TEST_CASE("composite channel: dimension mismatch raises") {
  Philox rng(3);
  ChannelSet ch = random_channels(rng, 2, 4, 1, 0);
  IosState ios = IosState::neutral(3);  // wrong element count
  CHECK_THROWS_AS(composite_channel(ch, ios, 0), std::invalid_argument);
  CHECK_THROWS_AS(composite_channel(ch, IosState::neutral(4), 5),
                  std::out_of_range);
}

TEST_CASE("composite channel is linear in phases and amplitudes") {
  Philox rng(11);
  const ChannelSet ch = random_channels(rng, 3, 5, 2, 2);
  for (int user = 0; user < 4; ++user) {
    const CVec a1 = random_cvec(rng, 5), a2 = random_cvec(rng, 5);
    const CVec b1 = random_cvec(rng, 5), b2 = random_cvec(rng, 5);
    const cplx s = rng.next_cgaussian(1.0);
    const CVec lhs =
        composite_from_coeffs(ch, a1 + s * a2, b1 + s * b2, user);
    // conjugate-linear in the element coefficients
    const CVec rhs = composite_from_coeffs(ch, a1, b1, user) +
                     std::conj(s) * (composite_from_coeffs(ch, a2, b2, user) -
                                     composite_from_coeffs(
                                         ch, CVec::Zero(5), CVec::Zero(5), user));
    CHECK((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("sinr: single user, unit channel and beam") {
  CVec e1 = CVec::Zero(2);
  e1[0] = 1.0;
  const ChannelSet ch = direct_only(2, e1);
  const IosState ios = IosState::neutral(0);
  Beamformers w = Beamformers::zeros(2, 1, 0);
  w.w_r.col(0) = e1;
  const RVec s = sinr_all(ch, ios, w, 1.0, 1.0);
  CHECK(s[0] == doctest::Approx(1.0));
}

TEST_CASE("sinr: orthogonal composites with matched beams see no interference") {
  ChannelSet ch;
  ch.g = CMat::Zero(0, 2);
  ch.h_d = CMat::Identity(2, 2);
  ch.h_r = CMat::Zero(0, 2);
  ch.h_t = CMat::Zero(0, 0);
  const IosState ios = IosState::neutral(0);
  Beamformers w = Beamformers::zeros(2, 2, 0);
  w.w_r(0, 0) = 2.0;
  w.w_r(1, 1) = 3.0;
  const RVec s = sinr_all(ch, ios, w, 0.5, 0.5);
  CHECK(s[0] == doctest::Approx(4.0 / 0.5));
  CHECK(s[1] == doctest::Approx(9.0 / 0.5));
}

TEST_CASE("sinr: equal signal and interference gives 1/2") {
  CVec c = CVec::Zero(2);
  c[0] = 1.0;
  ChannelSet ch;
  ch.g = CMat::Zero(0, 2);
  ch.h_d = CMat(2, 2);
  ch.h_d.col(0) = c;
  ch.h_d.col(1) = c;  // second user's channel irrelevant here
  ch.h_r = CMat::Zero(0, 2);
  ch.h_t = CMat::Zero(0, 0);
  Beamformers w = Beamformers::zeros(2, 2, 0);
  w.w_r(0, 0) = 1.0;
  w.w_r(0, 1) = 1.0;  // c^H w_1 = c^H w_2 = 1
  const RVec s = sinr_all(ch, IosState::neutral(0), w, 1.0, 1.0);
  CHECK(s[0] == doctest::Approx(0.5));
}

TEST_CASE("sinr is invariant to a unit-phase rotation of any beam column") {
  Philox rng(23);
  const ChannelSet ch = random_channels(rng, 3, 4, 2, 1);
  const IosState ios = random_ios(rng, 4);
  Beamformers w = random_beams(rng, 3, 2, 1);
  const RVec before = sinr_all(ch, ios, w, 0.3, 0.7);
  const cplx rot = std::polar(1.0, 1.234);
  w.w_r.col(1) *= rot;
  w.w_t.col(0) *= std::polar(1.0, -2.5);
  const RVec after = sinr_all(ch, ios, w, 0.3, 0.7);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sum rate examples") {
  CVec e1 = CVec::Zero(2);
  e1[0] = 1.0;
  const ChannelSet ch = direct_only(2, e1);
  const IosState ios = IosState::neutral(0);
  Beamformers w = Beamformers::zeros(2, 1, 0);
  w.w_r.col(0) = e1;
  CHECK(sum_rate(ch, ios, w, 1.0, 1.0) == doctest::Approx(1.0));

  // SINR vector [3, 1] -> 2 + 1 = 3 bits/s/Hz.
  ChannelSet ch2;
  ch2.g = CMat::Zero(0, 2);
  ch2.h_d = CMat::Identity(2, 2);
  ch2.h_r = CMat::Zero(0, 2);
  ch2.h_t = CMat::Zero(0, 0);
  Beamformers w2 = Beamformers::zeros(2, 2, 0);
  w2.w_r(0, 0) = std::sqrt(3.0);
  w2.w_r(1, 1) = 1.0;
  CHECK(sum_rate(ch2, ios, w2, 1.0, 1.0) == doctest::Approx(3.0));

  CHECK(sum_rate(ch, ios, Beamformers::zeros(2, 1, 0), 1.0, 1.0) ==
        doctest::Approx(0.0));
}

TEST_CASE("total power examples") {
  CHECK(total_power(Beamformers::zeros(3, 2, 1)) == doctest::Approx(0.0));
  Beamformers one = Beamformers::zeros(3, 1, 0);
  one.w_r(0, 0) = 1.0;
  CHECK(total_power(one) == doctest::Approx(1.0));
  Beamformers two = Beamformers::zeros(3, 1, 1);
  two.w_r(0, 0) = 1.0;
  two.w_t(1, 0) = 2.0;
  CHECK(total_power(two) == doctest::Approx(5.0));
}

TEST_CASE("mse: nu = 0 leaves only the unit constant") {
  Philox rng(5);
  const ChannelSet ch = random_channels(rng, 3, 4, 2, 1);
  const IosState ios = random_ios(rng, 4);
  const Beamformers w = random_beams(rng, 3, 2, 1);
  const RVec m = mse_all(ch, ios, w, CVec::Zero(3), 1.0, 1.0);
  for (int u = 0; u < m.size(); ++u) CHECK(m[u] == doctest::Approx(1.0));
}

TEST_CASE("mse: hand-computed single-user value") {
  CVec e1 = CVec::Zero(2);
  e1[0] = 1.0;
  const ChannelSet ch = direct_only(2, e1);
  Beamformers w = Beamformers::zeros(2, 1, 0);
  w.w_r.col(0) = e1;  // c^H w = 1
  CVec nu(1);
  nu[0] = 0.5;
  const RVec m = mse_all(ch, IosState::neutral(0), w, nu, 1.0, 1.0);
  CHECK(m[0] == doctest::Approx(0.5));
}

TEST_CASE("mse at the MMSE scalar equals 1/(1+sinr)") {
  Philox rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelSet ch = random_channels(rng, 3, 5, 2, 2);
    const IosState ios = random_ios(rng, 5);
    const Beamformers w = random_beams(rng, 3, 2, 2);
    const double nr = 0.4, nt = 1.3;
    const RVec s = sinr_all(ch, ios, w, nr, nt);
    CVec nu(4);
    for (int u = 0; u < 4; ++u) {
      const CVec c = composite_channel(ch, ios, u);
      double rx = 0.0;
      for (int j = 0; j < 4; ++j) rx += std::norm(cplx(c.dot(w.column(j))));
      nu[u] = cplx(c.dot(w.column(u))) / (rx + (u < 2 ? nr : nt));
    }
    const RVec m = mse_all(ch, ios, w, nu, nr, nt);
    for (int u = 0; u < 4; ++u)
      CHECK(std::abs(m[u] - 1.0 / (1.0 + s[u])) <
            1e-9 * (1.0 + 1.0 / (1.0 + s[u])));
  }
}

TEST_CASE("rates and powers are nonnegative") {
  Philox rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const ChannelSet ch = random_channels(rng, 2, 3, 1, 1);
    const IosState ios = random_ios(rng, 3);
    const Beamformers w = random_beams(rng, 2, 1, 1);
    CHECK(sum_rate(ch, ios, w, 1.0, 1.0) >= 0.0);
    CHECK(total_power(w) >= 0.0);
  }
}
