#pragma once

// Reproducible problem instances used by the test suites and example configs.

#include <cstddef>
#include <cstdint>
#include <utility>

#include "asynciter/problem.hpp"
#include "asynciter/random.hpp"

namespace asynciter::instances {

// Q diag(lambda) Q' with lambda evenly spaced over [mu, lipschitz] (both
// endpoints attained) and Q a random orthogonal matrix.
inline Matrix random_spd(Index n, double mu, double lipschitz, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) g(r, c) = rng.normal();
  }
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) {
    lambda[i] = n == 1 ? mu : mu + (lipschitz - mu) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  const Matrix a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

// f = x^2 / 2 on R, g = 0, gamma = 1: a single step reaches the fixed point.
inline ProblemInstance scalar_quadratic() {
  return ProblemInstance(SmoothPart::quadratic(Matrix::Identity(1, 1), Vector::Zero(1), 1.0, 1.0),
                         NonsmoothPart::zero(), BlockPartition::contiguous(1, 1), 1.0);
}

// SPD matrix whose spectrum lies in [mu, lipschitz] and whose off-diagonal
// blocks (with respect to `blocks`) have block-row sums of spectral norms at most
// `coupling`. Diagonal blocks get spectra evenly spread over
// [mu + coupling, lipschitz - coupling]. With gamma = 2/(mu+L) the gradient step
// I - gamma*A is then a contraction with factor (L-mu)/(L+mu) in the block-max
// norm, not only in the Euclidean norm.
inline Matrix block_coupled_spd(const BlockPartition& blocks, double mu, double lipschitz,
                                double coupling, std::uint64_t seed) {
  if (!(coupling >= 0.0) || 2.0 * coupling > lipschitz - mu) {
    throw InputError("block_coupled_spd: coupling must lie in [0, (L - mu)/2]");
  }
  const Index n = blocks.dim();
  const std::size_t nb = blocks.size();
  Rng rng(seed);
  Matrix a = Matrix::Zero(n, n);
  const double lo = mu + coupling;
  const double hi = lipschitz - coupling;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& idx = blocks.block(b);
    const Index len = static_cast<Index>(idx.size());
    const Matrix d = random_spd(len, lo, hi, rng.next());
    for (Index r = 0; r < len; ++r) {
      for (Index c = 0; c < len; ++c) a(idx[r], idx[c]) = d(r, c);
    }
  }
  if (nb > 1 && coupling > 0.0) {
    Matrix c = Matrix::Zero(n, n);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      for (std::size_t bj = bi + 1; bj < nb; ++bj) {
        for (Index r : blocks.block(bi)) {
          for (Index q : blocks.block(bj)) {
            c(r, q) = rng.normal();
            c(q, r) = c(r, q);
          }
        }
      }
    }
    double worst = 0.0;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      double row = 0.0;
      for (std::size_t bj = 0; bj < nb; ++bj) {
        if (bi == bj) continue;
        Matrix sub(blocks.block(bi).size(), blocks.block(bj).size());
        for (std::size_t r = 0; r < blocks.block(bi).size(); ++r) {
          for (std::size_t q = 0; q < blocks.block(bj).size(); ++q) {
            sub(static_cast<Index>(r), static_cast<Index>(q)) =
                c(blocks.block(bi)[r], blocks.block(bj)[q]);
          }
        }
        row += Eigen::JacobiSVD<Matrix>(sub).singularValues()(0);
      }
      worst = std::max(worst, row);
    }
    // Shrink slightly below the budget so rounding cannot push past it.
    a += c * (coupling * (1.0 - 1e-9) / worst);
  }
  return 0.5 * (a + a.transpose());
}

// 10-D quadratic, mu = 1, L = 10, g = 0.1 |x|_1, gamma = 2/11.
inline ProblemInstance lasso_quadratic(std::size_t n_blocks = 2, std::uint64_t seed = 11) {
  const Index n = 10;
  BlockPartition blocks = BlockPartition::contiguous(n, n_blocks);
  Matrix a = block_coupled_spd(blocks, 1.0, 10.0, 0.9, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Vector b = rng.normal_vector(n, 2.0);
  return ProblemInstance(SmoothPart::quadratic(std::move(a), std::move(b), 1.0, 10.0),
                         NonsmoothPart::l1(0.1), std::move(blocks), 2.0 / 11.0);
}

// 50-D quadratic, mu = 1, L = 100, g = indicator of [-0.5, 0.5]^50, gamma = 2/101.
inline ProblemInstance box_quadratic(std::size_t n_blocks = 5, std::uint64_t seed = 50) {
  const Index n = 50;
  BlockPartition blocks = BlockPartition::contiguous(n, n_blocks);
  Matrix a = block_coupled_spd(blocks, 1.0, 100.0, 9.9, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Vector b = rng.normal_vector(n, 10.0);
  return ProblemInstance(SmoothPart::quadratic(std::move(a), std::move(b), 1.0, 100.0),
                         NonsmoothPart::box(Vector::Constant(n, -0.5), Vector::Constant(n, 0.5)),
                         std::move(blocks), 2.0 / 101.0);
}

// Ridge least squares on m random samples plus an l1 penalty (elastic net).
inline ProblemInstance elastic_net(std::size_t n_blocks = 2, std::uint64_t seed = 7,
                                   Index n = 10, Index m = 200) {
  Rng rng(seed);
  Matrix y(m, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < m; ++r) y(r, c) = rng.normal();
  }
  Vector truth = rng.normal_vector(n);
  for (Index i = 0; i < n; i += 3) truth[i] = 0.0;
  Vector z = y * truth + rng.normal_vector(m, 0.1);
  return ProblemInstance(SmoothPart::ridge_least_squares(Dataset(std::move(y), std::move(z)), 0.1),
                         NonsmoothPart::l1(0.05), BlockPartition::contiguous(n, n_blocks));
}

}  // namespace asynciter::instances
