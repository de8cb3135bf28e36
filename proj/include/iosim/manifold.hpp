#ifndef IOSIM_MANIFOLD_HPP
#define IOSIM_MANIFOLD_HPP

#include <functional>
#include <vector>

#include "iosim/types.hpp"

namespace iosim {

/// Differentiable objective over the complex circle manifold
/// { phi in C^M : |phi_m| = 1 }. euclidean_gradient returns g with
/// df = Re{g^H dphi}; consistency with evaluate is checked by the
/// finite-difference tests.
struct SmoothedObjective {
  std::function<double(const CVec&)> evaluate;
  std::function<CVec(const CVec&)> euclidean_gradient;
  double epsilon = 0.0;  // smoothing temperature of the max-pooling, if any
};

struct ArmijoOptions {
  double initial_step = 1.0;  // scaled by 1/||d|| before the first trial
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 50;
};

struct RcgOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;
  ArmijoOptions armijo;
  bool pr_plus = true;  // clip the Polak-Ribiere coefficient at zero
};

/// Smoothed maximum eps * log sum exp(v_k / eps), computed with max
/// subtraction. Throws on an empty vector or eps <= 0.
double lse_smooth(const RVec& values, double eps);

/// Projection of a Euclidean gradient onto the tangent space at phi:
///   g - Re{g .* conj(phi)} .* phi.
/// Requires |phi_m| = 1; the result r satisfies Re{r .* conj(phi)} = 0.
CVec riemannian_grad(const CVec& euclid_grad, const CVec& phi);

/// Elementwise retraction (phi_m + step_m) / |phi_m + step_m|.
/// Throws if any magnitude vanishes.
CVec retract(const CVec& phi, const CVec& step);

struct RcgResult {
  CVec phi;
  std::vector<double> trace;  // objective values, non-increasing
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Conjugate-gradient descent on the complex circle: projected gradients,
/// Polak-Ribiere(+) directions with projection transport, Armijo
/// backtracking, elementwise retraction.
RcgResult rcg_minimize(const SmoothedObjective& obj, const CVec& phi0,
                       const RcgOptions& opts = {});

/// Builds the smoothed-max objective over quadratic forms
///   f_k(phi) = phi^H B_k phi + 2 Re{phi^H b_k} + c_k
/// kept in the factored form B_k = sum_j s_{k,j} v_{k,j} v_{k,j}^H so that
/// evaluation costs O(K M) per user instead of O(M^2).
struct QuadraticTerm {
  CMat vectors;   // M x J, one column per rank-one factor
  RVec scales;    // J signed weights
  CVec linear;    // b_k
  double offset;  // c_k
};

double quadratic_value(const QuadraticTerm& q, const CVec& phi);
CVec quadratic_gradient(const QuadraticTerm& q, const CVec& phi);

SmoothedObjective make_lse_objective(std::vector<QuadraticTerm> terms,
                                     double eps);

}  // namespace iosim

#endif
