#include <doctest.h>

#include "iosim/manifold.hpp"
#include "test_util.hpp"

using namespace iosim;
using namespace iosim::testutil;

TEST_CASE("lse_smooth basics") {
  RVec two(2);
  two << 0.0, 0.0;
  CHECK(lse_smooth(two, 1.0) == doctest::Approx(std::log(2.0)));

  RVec one(1);
  one << 5.0;
  CHECK(lse_smooth(one, 0.3) == doctest::Approx(5.0));
  CHECK(lse_smooth(one, 123.0) == doctest::Approx(5.0));

  // max dominance, and no overflow for huge ratios
  RVec far(2);
  far << 0.0, 10.0;
  CHECK(lse_smooth(far, 0.1) == doctest::Approx(10.0).epsilon(1e-12));

  RVec huge(2);
  huge << 0.0, 1e6;
  CHECK(std::isfinite(lse_smooth(huge, 1e-3)));

  CHECK_THROWS_AS(lse_smooth(RVec(0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lse_smooth(two, 0.0), std::invalid_argument);
}

TEST_CASE("riemannian gradient projection") {
  CVec phi(1), g(1);
  phi << cplx(1, 0);
  g << cplx(1, 1);
  CVec r = riemannian_grad(g, phi);
  CHECK(std::abs(r[0] - cplx(0, 1)) < 1e-15);

  // radial directions vanish
  Philox rng(2);
  CVec phi2 = random_phases(rng, 6);
  CVec radial = 2.7 * phi2;
  CHECK(riemannian_grad(radial, phi2).norm() < 1e-14);

  // hand case phi = i, g = 1: result 1 - Re{1 * (-i)} * i = 1
  CVec phi3(1), g3(1);
  phi3 << cplx(0, 1);
  g3 << cplx(1, 0);
  CHECK(std::abs(riemannian_grad(g3, phi3)[0] - cplx(1, 0)) < 1e-15);

  CVec bad(1);
  bad << cplx(2, 0);
  CHECK_THROWS_AS(riemannian_grad(g3, bad), std::invalid_argument);
}

TEST_CASE("tangency of the projected gradient") {
  Philox rng(4);
  for (int t = 0; t < 20; ++t) {
    const CVec phi = random_phases(rng, 8);
    const CVec g = random_cvec(rng, 8);
    const CVec r = riemannian_grad(g, phi);
    const RVec radial = (r.array() * phi.conjugate().array()).real();
    CHECK(radial.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("retraction") {
  Philox rng(6);
  const CVec phi = random_phases(rng, 5);
  CHECK((retract(phi, CVec::Zero(5)) - phi).norm() < 1e-15);

  CVec one(1), istep(1);
  one << cplx(1, 0);
  istep << cplx(0, 1);
  CHECK(std::abs(retract(one, istep)[0] - cplx(1, 1) / std::sqrt(2.0)) <
        1e-15);

  const CVec out = retract(phi, random_cvec(rng, 5, 4.0));
  for (int m = 0; m < 5; ++m)
    CHECK(std::abs(std::abs(out[m]) - 1.0) < 1e-15);

  CVec kill(1);
  kill << cplx(-1, 0);
  CHECK_THROWS_AS(retract(one, kill), std::domain_error);
}

namespace {

/// ||phi - 1||^2 on the circle manifold; unique minimizer is all ones.
SmoothedObjective distance_to_ones() {
  SmoothedObjective obj;
  obj.evaluate = [](const CVec& phi) {
    return (phi.array() - 1.0).matrix().squaredNorm();
  };
  obj.euclidean_gradient = [](const CVec& phi) {
    return CVec(2.0 * (phi.array() - 1.0).matrix());
  };
  return obj;
}

}  // namespace

TEST_CASE("rcg converges to the unique minimizer on the circle") {
  Philox rng(8);
  const CVec phi0 = random_phases(rng, 4);
  const RcgResult res = rcg_minimize(distance_to_ones(), phi0);
  CHECK(res.trace.back() < 1e-8);
  CHECK((res.phi.array() - 1.0).matrix().norm() < 1e-4);
}

TEST_CASE("rcg on a constant objective stops immediately") {
  SmoothedObjective obj;
  obj.evaluate = [](const CVec&) { return 3.5; };
  obj.euclidean_gradient = [](const CVec& p) { return CVec(CVec::Zero(p.size())); };
  Philox rng(9);
  const RcgResult res = rcg_minimize(obj, random_phases(rng, 3));
  CHECK(res.iterations == 0);
  CHECK(res.trace.size() == 1);
  CHECK(res.grad_norm == doctest::Approx(0.0));
}

TEST_CASE("rcg trace is monotone and iterates stay on the manifold") {
  Philox rng(10);
  for (int t = 0; t < 5; ++t) {
    // random PSD-ish quadratic via factored terms
    QuadraticTerm q;
    q.vectors = random_cmat(rng, 6, 3);
    q.scales = RVec::Ones(3);
    q.linear = random_cvec(rng, 6);
    q.offset = 0.0;
    SmoothedObjective obj = make_lse_objective({q}, 1.0);
    const RcgResult res = rcg_minimize(obj, random_phases(rng, 6));
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      CHECK(res.trace[i] <= res.trace[i - 1] + 1e-12);
    for (int m = 0; m < 6; ++m)
      CHECK(std::abs(std::abs(res.phi[m]) - 1.0) < 1e-12);
  }
}

TEST_CASE("finite differences confirm the lse objective gradient") {
  Philox rng(12);
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const int m = 3 + static_cast<int>(rng.next_u32() % 4);
    std::vector<QuadraticTerm> terms;
    const int nk = 1 + static_cast<int>(rng.next_u32() % 3);
    for (int k = 0; k < nk; ++k) {
      QuadraticTerm q;
      q.vectors = random_cmat(rng, m, 2);
      RVec s(2);
      s << 1.0, -0.5;
      q.scales = s;
      q.linear = random_cvec(rng, m);
      q.offset = rng.next_gaussian();
      terms.push_back(q);
    }
    SmoothedObjective obj = make_lse_objective(terms, 0.7);
    const CVec phi = random_phases(rng, m);
    const CVec g = obj.euclidean_gradient(phi);
    // directional derivative along an ambient direction
    const CVec dir = random_cvec(rng, m);
    const double h = 1e-6;
    const double fp = obj.evaluate(phi + h * dir);
    const double fm = obj.evaluate(phi - h * dir);
    const double fd = (fp - fm) / (2.0 * h);
    const double an = (g.dot(dir)).real();  // Re{g^H dir}
    CHECK(std::abs(fd - an) < 1e-5 * std::max(1.0, std::abs(an)));
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("rcg matches a fine 2-D phase grid on quadratics") {
  Philox rng(14);
  for (int t = 0; t < 3; ++t) {
    QuadraticTerm q;
    q.vectors = random_cmat(rng, 2, 2);
    RVec s(2);
    s << 1.0, 0.6;
    q.scales = s;
    q.linear = random_cvec(rng, 2);
    q.offset = 0.0;
    SmoothedObjective obj;
    obj.evaluate = [q](const CVec& p) { return quadratic_value(q, p); };
    obj.euclidean_gradient = [q](const CVec& p) {
      return quadratic_gradient(q, p);
    };

    // exhaustive grid at 1e-3 rad
    const int n = 6284;
    std::vector<cplx> circle(n);
    for (int i = 0; i < n; ++i) circle[i] = std::polar(1.0, 2.0 * M_PI * i / n);
    const cplx v10 = std::conj(q.vectors(0, 0)), v11 = std::conj(q.vectors(1, 0));
    const cplx v20 = std::conj(q.vectors(0, 1)), v21 = std::conj(q.vectors(1, 1));
    const cplx b0 = q.linear[0], b1 = q.linear[1];
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
      const cplx x = circle[i];
      const cplx a1 = v10 * x, a2 = v20 * x;
      const double lin_x = 2.0 * std::real(std::conj(x) * b0);
      for (int j = 0; j < n; ++j) {
        const cplx y = circle[j];
        const double val = s[0] * std::norm(a1 + v11 * y) +
                           s[1] * std::norm(a2 + v21 * y) + lin_x +
                           2.0 * std::real(std::conj(y) * b1);
        best = std::min(best, val);
      }
    }

    double rcg_best = 1e300;
    for (int start = 0; start < 8; ++start) {
      const RcgResult res = rcg_minimize(obj, random_phases(rng, 2));
      rcg_best = std::min(rcg_best, res.trace.back());
    }
    CHECK(rcg_best <= best + 1e-5);
    CHECK(rcg_best >= best - 1e-3);  // grid can only be coarser
  }
}
