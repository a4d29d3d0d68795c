#pragma once

// Composite problems  min_x f(x) + g(x)  with f smooth and strongly convex and
// g one of a few closed-form proximable penalties.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "asynciter/errors.hpp"
#include "asynciter/random.hpp"

namespace asynciter {

using Index = Eigen::Index;

namespace detail {

inline void require_dim(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw InputError(std::string(what) + ": expected dimension " + std::to_string(n) +
                     ", got " + std::to_string(x.size()));
  }
}

inline void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

}  // namespace detail

// m training samples (y_h, z_h) stored row-wise: features.row(h) is y_h.
struct Dataset {
  Matrix features;
  Vector targets;

  Dataset() = default;
  Dataset(Matrix y, Vector z) : features(std::move(y)), targets(std::move(z)) {
    if (features.rows() < 1) throw InputError("dataset: need at least one sample");
    if (features.cols() < 1) throw InputError("dataset: feature dimension must be positive");
    if (targets.size() != features.rows()) {
      throw InputError("dataset: targets count does not match sample count");
    }
  }

  Index samples() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

struct QuadraticTerm {
  Matrix A;  // symmetric positive definite
  Vector b;
};

struct RidgeTerm {
  Dataset data;
  double ridge = 0.0;
};

// The smooth part f together with its curvature constants mu <= L.
//
//   quadratic:              f(x) = 1/2 x'Ax - b'x
//   ridge_least_squares:    f(x) = 1/(2m) sum_h (y_h'x - z_h)^2 + ridge/2 |x|^2
class SmoothPart {
 public:
  using Term = std::variant<QuadraticTerm, RidgeTerm>;

  // Constants taken from the spectrum of A.
  static SmoothPart quadratic(Matrix A, Vector b) {
    check_quadratic_shape(A, b);
    const auto [lo, hi] = spectrum_range(A);
    if (!(lo > 0.0)) throw InputError("quadratic: A is not positive definite");
    return SmoothPart(QuadraticTerm{std::move(A), std::move(b)}, lo, hi);
  }

  // Declared constants; the spectrum of A must lie in [mu, lipschitz] up to 1e-8.
  static SmoothPart quadratic(Matrix A, Vector b, double mu, double lipschitz) {
    check_quadratic_shape(A, b);
    check_constants(mu, lipschitz);
    const auto [lo, hi] = spectrum_range(A);
    constexpr double kTol = 1e-8;
    if (lo < mu - kTol || hi > lipschitz + kTol) {
      throw InputError("quadratic: eigenvalues [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "] outside declared [mu, L] = [" +
                       std::to_string(mu) + ", " + std::to_string(lipschitz) + "]");
    }
    return SmoothPart(QuadraticTerm{std::move(A), std::move(b)}, mu, lipschitz);
  }

  static SmoothPart ridge_least_squares(Dataset data, double ridge) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
      throw InputError("ridge_least_squares: ridge must be a nonnegative scalar");
    }
    const double m = static_cast<double>(data.samples());
    const Matrix gram = data.features.transpose() * data.features / m;
    auto [lo, hi] = spectrum_range(gram);
    lo = std::max(lo, 0.0);
    const double mu = ridge + lo;
    const double lipschitz = ridge + hi;
    if (!(mu > 0.0)) {
      throw InputError("ridge_least_squares: not strongly convex (ridge = 0 and rank-deficient features)");
    }
    return SmoothPart(RidgeTerm{std::move(data), ridge}, mu, lipschitz);
  }

  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  const Term& term() const { return term_; }

  Index dim() const {
    return std::visit(
        [](const auto& t) -> Index {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, QuadraticTerm>) {
            return t.A.rows();
          } else {
            return t.data.dim();
          }
        },
        term_);
  }

  double value(const Vector& x) const {
    return std::visit(
        [&](const auto& t) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, QuadraticTerm>) {
            return 0.5 * x.dot(t.A * x) - t.b.dot(x);
          } else {
            const Vector r = t.data.features * x - t.data.targets;
            return 0.5 * r.squaredNorm() / static_cast<double>(t.data.samples()) +
                   0.5 * t.ridge * x.squaredNorm();
          }
        },
        term_);
  }

  // Both kinds are quadratic, so the Hessian is constant.
  Matrix hessian() const {
    return std::visit(
        [](const auto& t) -> Matrix {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, QuadraticTerm>) {
            return t.A;
          } else {
            const Index n = t.data.dim();
            return t.data.features.transpose() * t.data.features /
                       static_cast<double>(t.data.samples()) +
                   t.ridge * Matrix::Identity(n, n);
          }
        },
        term_);
  }

  Vector gradient(const Vector& x) const {
    return std::visit(
        [&](const auto& t) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, QuadraticTerm>) {
            return t.A * x - t.b;
          } else {
            const Vector r = t.data.features * x - t.data.targets;
            return t.data.features.transpose() * r / static_cast<double>(t.data.samples()) +
                   t.ridge * x;
          }
        },
        term_);
  }

 private:
  SmoothPart(Term term, double mu, double lipschitz)
      : term_(std::move(term)), mu_(mu), lipschitz_(lipschitz) {
    check_constants(mu_, lipschitz_);
  }

  static void check_constants(double mu, double lipschitz) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("smooth part: mu must be positive");
    if (!(lipschitz >= mu) || !std::isfinite(lipschitz)) {
      throw InputError("smooth part: lipschitz must be finite and >= mu");
    }
  }

  static void check_quadratic_shape(const Matrix& A, const Vector& b) {
    if (A.rows() < 1 || A.rows() != A.cols()) throw InputError("quadratic: A must be square");
    if (b.size() != A.rows()) throw InputError("quadratic: b dimension does not match A");
    if (!A.allFinite() || !b.allFinite()) throw InputError("quadratic: non-finite entry");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
      throw InputError("quadratic: A is not symmetric");
    }
  }

  static std::pair<double, double> spectrum_range(const Matrix& S) {
    const Matrix sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InputError("eigenvalue computation failed");
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
  }

  Term term_;
  double mu_;
  double lipschitz_;
};

struct ZeroPenalty {};

struct L1Penalty {
  double lambda = 0.0;
};

// Indicator of the box [lo, hi].
struct BoxConstraint {
  Vector lo;
  Vector hi;
};

// The nonsmooth part g with its closed-form proximal map.
class NonsmoothPart {
 public:
  using Term = std::variant<ZeroPenalty, L1Penalty, BoxConstraint>;

  NonsmoothPart() : term_(ZeroPenalty{}) {}

  static NonsmoothPart zero() { return NonsmoothPart(ZeroPenalty{}); }

  static NonsmoothPart l1(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("l1: lambda must be >= 0");
    return NonsmoothPart(L1Penalty{lambda});
  }

  static NonsmoothPart box(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) throw InputError("box: lo and hi differ in dimension");
    for (Index i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
        throw InputError("box: need lo_i <= hi_i at coordinate " + std::to_string(i));
      }
    }
    return NonsmoothPart(BoxConstraint{std::move(lo), std::move(hi)});
  }

  const Term& term() const { return term_; }

  // Extended-value convention: +infinity outside the box.
  double value(const Vector& x) const {
    return std::visit(
        [&](const auto& t) -> double {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ZeroPenalty>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, L1Penalty>) {
            return t.lambda * x.lpNorm<1>();
          } else {
            for (Index i = 0; i < x.size(); ++i) {
              if (x[i] < t.lo[i] || x[i] > t.hi[i]) return std::numeric_limits<double>::infinity();
            }
            return 0.0;
          }
        },
        term_);
  }

  // argmin_v g(v) + |v - x|^2 / (2 gamma)
  Vector prox(const Vector& x, double gamma) const {
    if (!(gamma > 0.0)) throw InputError("prox: gamma must be positive");
    return std::visit(
        [&](const auto& t) -> Vector {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ZeroPenalty>) {
            return x;
          } else if constexpr (std::is_same_v<T, L1Penalty>) {
            const double tau = gamma * t.lambda;
            Vector out(x.size());
            for (Index i = 0; i < x.size(); ++i) {
              const double a = std::abs(x[i]) - tau;
              out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
            }
            return out;
          } else {
            return x.cwiseMax(t.lo).cwiseMin(t.hi);
          }
        },
        term_);
  }

  // Max violation of 0 in grad + dg(y), given the smooth gradient at y.
  double optimality_violation(const Vector& y, const Vector& grad) const {
    return std::visit(
        [&](const auto& t) -> double {
          using T = std::decay_t<decltype(t)>;
          double worst = 0.0;
          for (Index i = 0; i < y.size(); ++i) {
            double v;
            if constexpr (std::is_same_v<T, ZeroPenalty>) {
              v = std::abs(grad[i]);
            } else if constexpr (std::is_same_v<T, L1Penalty>) {
              v = y[i] == 0.0 ? std::max(0.0, std::abs(grad[i]) - t.lambda)
                              : std::abs(grad[i] + t.lambda * (y[i] > 0.0 ? 1.0 : -1.0));
            } else {
              if (y[i] < t.lo[i] || y[i] > t.hi[i]) return std::numeric_limits<double>::infinity();
              if (t.lo[i] == t.hi[i]) {
                v = 0.0;
              } else if (y[i] == t.lo[i]) {
                v = std::max(0.0, -grad[i]);
              } else if (y[i] == t.hi[i]) {
                v = std::max(0.0, grad[i]);
              } else {
                v = std::abs(grad[i]);
              }
            }
            worst = std::max(worst, v);
          }
          return worst;
        },
        term_);
  }

  // Dimension the term is tied to, if any.
  std::optional<Index> dim() const {
    if (const auto* b = std::get_if<BoxConstraint>(&term_)) return b->lo.size();
    return std::nullopt;
  }

 private:
  explicit NonsmoothPart(Term t) : term_(std::move(t)) {}

  Term term_;
};

// Ordered partition of the coordinates {0..n-1} into blocks.
class BlockPartition {
 public:
  BlockPartition() = default;

  explicit BlockPartition(std::vector<std::vector<Index>> blocks, Index dim)
      : blocks_(std::move(blocks)), dim_(dim) {
    if (blocks_.empty()) throw InputError("blocks: need at least one block");
    std::vector<int> seen(static_cast<std::size_t>(dim), 0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].empty()) throw InputError("blocks: block " + std::to_string(b) + " is empty");
      for (Index c : blocks_[b]) {
        if (c < 0 || c >= dim) throw InputError("blocks: coordinate out of range");
        if (seen[static_cast<std::size_t>(c)]++) {
          throw InputError("blocks: coordinate " + std::to_string(c) + " assigned twice");
        }
      }
    }
    for (Index c = 0; c < dim; ++c) {
      if (!seen[static_cast<std::size_t>(c)]) {
        throw InputError("blocks: coordinate " + std::to_string(c) + " not covered");
      }
    }
  }

  // n_blocks nearly equal contiguous runs; earlier blocks take the remainder.
  static BlockPartition contiguous(Index dim, std::size_t n_blocks) {
    if (n_blocks < 1 || static_cast<Index>(n_blocks) > dim) {
      throw InputError("blocks: need 1 <= n_blocks <= dim");
    }
    std::vector<std::vector<Index>> blocks(n_blocks);
    const Index base = dim / static_cast<Index>(n_blocks);
    const Index extra = dim % static_cast<Index>(n_blocks);
    Index next = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const Index len = base + (static_cast<Index>(b) < extra ? 1 : 0);
      for (Index k = 0; k < len; ++k) blocks[b].push_back(next++);
    }
    return BlockPartition(std::move(blocks), dim);
  }

  std::size_t size() const { return blocks_.size(); }
  Index dim() const { return dim_; }
  const std::vector<Index>& block(std::size_t b) const { return blocks_.at(b); }
  const std::vector<std::vector<Index>>& blocks() const { return blocks_; }

  double block_norm(const Vector& x, std::size_t b) const {
    double s = 0.0;
    for (Index c : blocks_[b]) s += x[c] * x[c];
    return std::sqrt(s);
  }

  // dst_b := src_b
  void copy_block(const Vector& src, Vector& dst, std::size_t b) const {
    for (Index c : blocks_[b]) dst[c] = src[c];
  }

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  std::vector<std::vector<Index>> blocks_;
  Index dim_ = 0;
};

// f + g on R^n with a block partition and a fixed step size gamma.
class ProblemInstance {
 public:
  // gamma defaults to 2 / (mu + L), the right end of the admissible interval.
  ProblemInstance(SmoothPart f, NonsmoothPart g, BlockPartition blocks,
                  std::optional<double> gamma = std::nullopt)
      : f_(std::move(f)), g_(std::move(g)), blocks_(std::move(blocks)) {
    if (blocks_.dim() != f_.dim()) throw InputError("problem: block partition dimension mismatch");
    if (auto gd = g_.dim(); gd && *gd != f_.dim()) {
      throw InputError("problem: nonsmooth part dimension mismatch");
    }
    gamma_ = gamma.value_or(max_step());
    if (!(gamma_ > 0.0) || gamma_ > max_step() * (1.0 + 1e-12)) {
      throw InputError("problem: gamma must lie in (0, 2/(mu+L)] = (0, " +
                       std::to_string(max_step()) + "]");
    }
  }

  ProblemInstance(SmoothPart f, NonsmoothPart g, std::optional<double> gamma = std::nullopt)
      : ProblemInstance(f, std::move(g), BlockPartition::contiguous(f.dim(), 1), gamma) {}

  const SmoothPart& f() const { return f_; }
  const NonsmoothPart& g() const { return g_; }
  const BlockPartition& blocks() const { return blocks_; }
  Index dim() const { return f_.dim(); }
  double gamma() const { return gamma_; }
  double mu() const { return f_.mu(); }
  double lipschitz() const { return f_.lipschitz(); }
  double max_step() const { return 2.0 / (f_.mu() + f_.lipschitz()); }

  ProblemInstance with_blocks(BlockPartition blocks) const {
    return ProblemInstance(f_, g_, std::move(blocks), gamma_);
  }

  ProblemInstance with_gamma(double gamma) const { return ProblemInstance(f_, g_, blocks_, gamma); }

 private:
  SmoothPart f_;
  NonsmoothPart g_;
  BlockPartition blocks_;
  double gamma_ = 0.0;
};

inline Vector gradient(const ProblemInstance& p, const Vector& x) {
  detail::require_dim(x, p.dim(), "gradient");
  detail::require_finite(x, "gradient");
  return p.f().gradient(x);
}

inline Vector prox(const ProblemInstance& p, const Vector& x, double gamma) {
  detail::require_dim(x, p.dim(), "prox");
  return p.g().prox(x, gamma);
}

inline double objective(const ProblemInstance& p, const Vector& x) {
  detail::require_dim(x, p.dim(), "objective");
  const double gv = p.g().value(x);
  if (std::isinf(gv)) return gv;
  return p.f().value(x) + gv;
}

// Subgradient optimality residual of y for min f + g; zero at the minimizer.
inline double optimality_violation(const ProblemInstance& p, const Vector& y) {
  detail::require_dim(y, p.dim(), "optimality_violation");
  return p.g().optimality_violation(y, p.f().gradient(y));
}

}  // namespace asynciter
