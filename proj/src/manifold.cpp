#include "iosim/manifold.hpp"

#include <cmath>
#include <memory>

namespace iosim {

double lse_smooth(const RVec& values, double eps) {
  if (values.size() == 0)
    throw std::invalid_argument("lse_smooth: empty value vector");
  if (eps <= 0) throw std::invalid_argument("lse_smooth: eps must be > 0");
  const double vmax = values.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < values.size(); ++i)
    acc += std::exp((values[i] - vmax) / eps);
  return vmax + eps * std::log(acc);
}

namespace {

void require_unit(const CVec& phi, const char* who) {
  for (int m = 0; m < phi.size(); ++m)
    if (std::abs(std::abs(phi[m]) - 1.0) > 1e-9)
      throw std::invalid_argument(std::string(who) +
                                  ": phi is not unit modulus");
}

double real_inner(const CVec& a, const CVec& b) {
  return a.dot(b).real();  // Re{a^H b}
}

}  // namespace

CVec riemannian_grad(const CVec& euclid_grad, const CVec& phi) {
  if (euclid_grad.size() != phi.size())
    throw std::invalid_argument("riemannian_grad: length mismatch");
  require_unit(phi, "riemannian_grad");
  const RVec radial =
      (euclid_grad.array() * phi.conjugate().array()).real();
  return euclid_grad - (radial.array() * phi.array()).matrix();
}

CVec retract(const CVec& phi, const CVec& step) {
  if (step.size() != phi.size())
    throw std::invalid_argument("retract: length mismatch");
  CVec out(phi.size());
  for (int m = 0; m < phi.size(); ++m) {
    const cplx z = phi[m] + step[m];
    const double mag = std::abs(z);
    if (mag == 0.0)
      throw std::domain_error("retract: degenerate step at element " +
                              std::to_string(m));
    out[m] = z / mag;
  }
  return out;
}

RcgResult rcg_minimize(const SmoothedObjective& obj, const CVec& phi0,
                       const RcgOptions& opts) {
  require_unit(phi0, "rcg_minimize");
  RcgResult res;
  res.phi = phi0;
  if (phi0.size() == 0) {
    res.trace = {obj.evaluate(phi0)};
    return res;
  }

  double f = obj.evaluate(res.phi);
  CVec grad = riemannian_grad(obj.euclidean_gradient(res.phi), res.phi);
  if (!std::isfinite(f) || !grad.allFinite())
    throw std::runtime_error("rcg_minimize: non-finite objective at start");
  res.trace.push_back(f);
  CVec dir = -grad;

  for (int it = 0; it < opts.max_iters; ++it) {
    res.grad_norm = grad.norm();
    if (res.grad_norm < opts.grad_tol) break;

    double slope = real_inner(grad, dir);
    if (slope >= 0) {  // not a descent direction: restart on the gradient
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    const double dnorm = dir.norm();
    double alpha = opts.armijo.initial_step / dnorm;
    bool accepted = false;
    CVec phi_new;
    double f_new = f;
    for (int bt = 0; bt < opts.armijo.max_backtracks; ++bt) {
      phi_new = retract(res.phi, alpha * dir);
      f_new = obj.evaluate(phi_new);
      if (!std::isfinite(f_new))
        throw std::runtime_error(
            "rcg_minimize: non-finite objective at iteration " +
            std::to_string(it));
      if (f_new <= f + opts.armijo.sufficient_decrease * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts.armijo.shrink;
    }
    if (!accepted) break;  // line search stalled; current point is the answer

    CVec grad_new = riemannian_grad(obj.euclidean_gradient(phi_new), phi_new);
    if (!grad_new.allFinite())
      throw std::runtime_error("rcg_minimize: non-finite gradient at iteration " +
                               std::to_string(it));

    // Transport by projecting onto the new tangent space.
    const CVec grad_old_t = riemannian_grad(grad, phi_new);
    const CVec dir_t = riemannian_grad(dir, phi_new);
    const double denom = grad.squaredNorm();
    double beta =
        denom > 0 ? real_inner(grad_new, grad_new - grad_old_t) / denom : 0.0;
    if (opts.pr_plus) beta = std::max(0.0, beta);

    res.phi = phi_new;
    f = f_new;
    grad = grad_new;
    dir = -grad + beta * dir_t;
    res.trace.push_back(f);
    res.iterations = it + 1;
  }
  res.grad_norm = grad.norm();
  return res;
}

double quadratic_value(const QuadraticTerm& q, const CVec& phi) {
  double val = q.offset + 2.0 * phi.dot(q.linear).real();
  for (int j = 0; j < q.scales.size(); ++j)
    val += q.scales[j] * std::norm(cplx(q.vectors.col(j).dot(phi)));
  return val;
}

CVec quadratic_gradient(const QuadraticTerm& q, const CVec& phi) {
  // d/dphi* of f, doubled: 2 (B phi + b) with B = sum s_j v_j v_j^H.
  CVec g = 2.0 * q.linear;
  for (int j = 0; j < q.scales.size(); ++j) {
    const cplx proj = q.vectors.col(j).dot(phi);  // v_j^H phi
    g += (2.0 * q.scales[j] * proj) * q.vectors.col(j);
  }
  return g;
}

SmoothedObjective make_lse_objective(std::vector<QuadraticTerm> terms,
                                     double eps) {
  if (terms.empty())
    throw std::invalid_argument("make_lse_objective: no terms");
  if (eps <= 0)
    throw std::invalid_argument("make_lse_objective: eps must be > 0");
  auto shared = std::make_shared<std::vector<QuadraticTerm>>(std::move(terms));

  SmoothedObjective obj;
  obj.epsilon = eps;
  obj.evaluate = [shared, eps](const CVec& phi) {
    RVec f(shared->size());
    for (std::size_t k = 0; k < shared->size(); ++k)
      f[static_cast<int>(k)] = quadratic_value((*shared)[k], phi);
    return lse_smooth(f, eps);
  };
  obj.euclidean_gradient = [shared, eps](const CVec& phi) {
    RVec f(shared->size());
    for (std::size_t k = 0; k < shared->size(); ++k)
      f[static_cast<int>(k)] = quadratic_value((*shared)[k], phi);
    const double fmax = f.maxCoeff();
    RVec w = ((f.array() - fmax) / eps).exp();
    w /= w.sum();  // softmax weights
    CVec g = CVec::Zero(phi.size());
    for (std::size_t k = 0; k < shared->size(); ++k)
      g += w[static_cast<int>(k)] * quadratic_gradient((*shared)[k], phi);
    return g;
  };
  return obj;
}

}  // namespace iosim
