#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "asynciter/errors.hpp"
#include "asynciter/problem.hpp"

namespace asynciter {

// The gradient-type fixed-point operator
//
//   y = prox_{gamma,g}(x),   G(x) = y - gamma * grad f(y),
//
// composed `inner_steps` times. A single step (inner_steps = 1) is the base
// operator; larger values give the multi-step approximate operator. Note the
// prox is applied before the gradient step, so the fixed point z* is not the
// minimizer itself; the minimizer is prox(z*).
class GradientTypeOperator {
 public:
  explicit GradientTypeOperator(ProblemInstance problem, std::size_t inner_steps = 1)
      : problem_(std::move(problem)), inner_steps_(inner_steps) {
    if (inner_steps_ < 1) throw InputError("operator: inner_steps must be >= 1");
  }

  const ProblemInstance& problem() const { return problem_; }
  std::size_t inner_steps() const { return inner_steps_; }
  Index dim() const { return problem_.dim(); }

  // One prox-then-gradient step.
  Vector base_step(const Vector& x) const {
    const Vector y = problem_.g().prox(x, problem_.gamma());
    Vector out = y - problem_.gamma() * problem_.f().gradient(y);
    if (!out.allFinite()) {
      throw NumericError("operator: non-finite value (instance mis-scaled?)");
    }
    return out;
  }

  // `steps`-fold composition of the base step.
  Vector apply_steps(const Vector& x, std::size_t steps) const {
    detail::require_dim(x, dim(), "operator");
    Vector v = x;
    for (std::size_t s = 0; s < steps; ++s) v = base_step(v);
    return v;
  }

  Vector apply(const Vector& x) const { return apply_steps(x, inner_steps_); }

  Vector operator()(const Vector& x) const { return apply(x); }

  // (1 - gamma*mu)^inner_steps. Valid Euclidean Lipschitz constant of apply()
  // for gamma in (0, 2/(mu+L)].
  double contraction_bound() const {
    const double base = std::max(0.0, 1.0 - rho());
    return std::pow(base, static_cast<double>(inner_steps_));
  }

  // Lipschitz constant of apply() in the unweighted block-max norm:
  // (max_i sum_j |(I - gamma H)_ij|_2)^inner_steps. Valid because every
  // supported prox acts coordinatewise. Asynchronous iterations are guaranteed
  // to contract when this is below one.
  double block_contraction_bound() const {
    const auto& blocks = problem_.blocks();
    const Index n = dim();
    const Matrix m = Matrix::Identity(n, n) - problem_.gamma() * problem_.f().hessian();
    double worst = 0.0;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      double row = 0.0;
      for (std::size_t bj = 0; bj < blocks.size(); ++bj) {
        const auto& ri = blocks.block(bi);
        const auto& cj = blocks.block(bj);
        Matrix sub(static_cast<Index>(ri.size()), static_cast<Index>(cj.size()));
        for (std::size_t r = 0; r < ri.size(); ++r) {
          for (std::size_t c = 0; c < cj.size(); ++c) {
            sub(static_cast<Index>(r), static_cast<Index>(c)) = m(ri[r], cj[c]);
          }
        }
        row += Eigen::JacobiSVD<Matrix>(sub).singularValues()(0);
      }
      worst = std::max(worst, row);
    }
    return std::pow(worst, static_cast<double>(inner_steps_));
  }

  // rho = gamma * mu
  double rho() const { return problem_.gamma() * problem_.mu(); }

 private:
  ProblemInstance problem_;
  std::size_t inner_steps_;
};

struct FixedPoint {
  Vector z_star;  // G(z*) = z*
  Vector y_star;  // prox(z*), the minimizer of f + g
  double residual = 0.0;  // |G(z*) - z*|_2
  std::size_t iterations = 0;
};

// Picard iteration of the base step from the origin. Once the residual drops
// below `tol` the iteration keeps going while it still improves, so the result
// sits at the floating-point floor rather than just under `tol`.
inline FixedPoint reference_fixed_point(const ProblemInstance& p, double tol = 1e-12) {
  if (!(tol > 0.0)) throw InputError("reference_fixed_point: tol must be positive");
  const GradientTypeOperator op(p, 1);
  const double q = op.contraction_bound();

  Vector z = Vector::Zero(p.dim());
  Vector next = op.base_step(z);
  double residual = (next - z).norm();
  const double r0 = residual;

  std::size_t cap = 1000;
  if (r0 > tol && q > 0.0) {
    cap += static_cast<std::size_t>(std::ceil(std::log(tol / r0) / std::log(q)));
  }

  FixedPoint best{z, Vector(), residual, 0};
  std::size_t stalled = 0;
  for (std::size_t it = 1; it <= cap; ++it) {
    z = std::move(next);
    next = op.base_step(z);
    residual = (next - z).norm();
    if (residual < best.residual) {
      best.z_star = z;
      best.residual = residual;
      best.iterations = it;
      stalled = 0;
    } else if (best.residual <= tol && ++stalled >= 20) {
      break;
    }
    if (residual == 0.0) break;
  }
  if (!(best.residual <= tol)) {
    throw DivergenceError("reference_fixed_point: residual " + std::to_string(best.residual) +
                          " above tolerance after " + std::to_string(cap) +
                          " iterations; check mu, L and gamma");
  }
  best.y_star = p.g().prox(best.z_star, p.gamma());
  return best;
}

}  // namespace asynciter
