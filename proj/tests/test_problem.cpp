#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "asynciter/instances.hpp"
#include "asynciter/operator.hpp"
#include "asynciter/oracles.hpp"
#include "asynciter/problem.hpp"
#include "asynciter/random.hpp"

using namespace asynciter;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ProblemInstance diag_quadratic(std::initializer_list<double> d, const NonsmoothPart& g = NonsmoothPart::zero(),
                               std::optional<double> gamma = std::nullopt) {
  const Vector dv = vec(d);
  const Index n = dv.size();
  return ProblemInstance(SmoothPart::quadratic(Matrix(dv.asDiagonal()), Vector::Zero(n)), g,
                         BlockPartition::contiguous(n, 1), gamma);
}

Vector finite_difference(const SmoothPart& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x;
    Vector xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f.value(xp) - f.value(xm)) / (2 * h);
  }
  return g;
}

std::vector<ProblemInstance> all_instances() {
  return {instances::scalar_quadratic(), instances::lasso_quadratic(), instances::box_quadratic(),
          instances::elastic_net()};
}

}  // namespace

TEST(Gradient, DiagonalQuadratic) {
  const auto p = diag_quadratic({1, 3});
  const Vector g = gradient(p, vec({4, 2}));
  EXPECT_DOUBLE_EQ(g[0], 4);
  EXPECT_DOUBLE_EQ(g[1], 6);
}

TEST(Gradient, VanishesAtUnconstrainedMinimizer) {
  for (const auto& p0 : all_instances()) {
    const ProblemInstance p(p0.f(), NonsmoothPart::zero(), p0.blocks(), p0.gamma());
    const auto fp = reference_fixed_point(p);
    EXPECT_LE(gradient(p, fp.y_star).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(Gradient, RidgeMatchesFiniteDifferencesTwoSamples) {
  Matrix y(2, 3);
  y << 1, 2, -1, 0.5, -3, 2;
  const auto f = SmoothPart::ridge_least_squares(Dataset(y, vec({1, -2})), 0.3);
  const Vector x = vec({0.2, -0.7, 1.1});
  const Vector diff = f.gradient(x) - finite_difference(f, x);
  EXPECT_LE(diff.lpNorm<Eigen::Infinity>(), 1e-5);
}

TEST(Gradient, FiniteDifferencesAllInstances) {
  Rng rng(3);
  for (const auto& p : all_instances()) {
    const Vector x = rng.normal_vector(p.dim());
    const Vector diff = p.f().gradient(x) - finite_difference(p.f(), x);
    EXPECT_LE(diff.lpNorm<Eigen::Infinity>(), 1e-5);
  }
}

TEST(Gradient, WrongDimensionThrows) {
  const auto p = diag_quadratic({1, 3});
  EXPECT_THROW(gradient(p, vec({1, 2, 3})), InputError);
}

TEST(Prox, ZeroIsIdentity) {
  const Vector x = vec({3, -0.5});
  EXPECT_EQ(NonsmoothPart::zero().prox(x, 0.7), x);
}

TEST(Prox, SoftThreshold) {
  const Vector out = NonsmoothPart::l1(2.0).prox(vec({3, -0.5}), 0.5);
  EXPECT_DOUBLE_EQ(out[0], 2);
  EXPECT_DOUBLE_EQ(out[1], 0);
  // against the grid argmin
  EXPECT_NEAR(oracle::grid_prox(oracle::GridPenalty::l1, 3, 0.5, 2.0, 0, 1e-4), 2, 1e-4);
  EXPECT_NEAR(oracle::grid_prox(oracle::GridPenalty::l1, -0.5, 0.5, 2.0, 0, 1e-4), 0, 1e-4);
}

TEST(Prox, BoxProjects) {
  const auto g = NonsmoothPart::box(vec({0, 0}), vec({1, 1}));
  const Vector out = g.prox(vec({1.7, -0.2}), 1.0);
  EXPECT_EQ(out, vec({1, 0}));
}

TEST(Prox, RejectsNonpositiveStep) {
  EXPECT_THROW(NonsmoothPart::l1(1).prox(vec({1}), 0.0), InputError);
}

TEST(Prox, Nonexpansive) {
  Rng rng(5);
  const Index n = 6;
  const NonsmoothPart kinds[] = {NonsmoothPart::zero(), NonsmoothPart::l1(0.4),
                                 NonsmoothPart::box(Vector::Constant(n, -0.5), Vector::Constant(n, 1.0))};
  for (const auto& g : kinds) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = rng.normal_vector(n, 2);
      const Vector y = rng.normal_vector(n, 2);
      EXPECT_LE((g.prox(x, 0.8) - g.prox(y, 0.8)).norm(), (x - y).norm() + 1e-12);
    }
  }
}

TEST(Objective, ScalarQuadratic) {
  const auto p = diag_quadratic({1});
  EXPECT_DOUBLE_EQ(objective(p, vec({2})), 2);
}

TEST(Objective, OutsideBoxIsInfinite) {
  const auto p = diag_quadratic({1, 1}, NonsmoothPart::box(vec({0, 0}), vec({1, 1})));
  EXPECT_EQ(objective(p, vec({2, 0.5})), std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isfinite(objective(p, vec({1, 0.5}))));
}

TEST(Objective, ElasticNetMinimizerBeatsStart) {
  const auto p = instances::elastic_net();
  const auto fp = reference_fixed_point(p);
  Rng rng(1);
  const Vector x0 = rng.normal_vector(p.dim());
  EXPECT_LE(objective(p, fp.y_star), objective(p, x0));
  EXPECT_LE(objective(p, fp.y_star), objective(p, Vector::Zero(p.dim())));
}

TEST(ReferenceFixedPoint, ScalarQuadratic) {
  const auto fp = reference_fixed_point(instances::scalar_quadratic());
  EXPECT_EQ(fp.z_star[0], 0.0);
  EXPECT_EQ(fp.y_star[0], 0.0);
}

TEST(ReferenceFixedPoint, BoxProjectionOfOrigin) {
  const auto p = diag_quadratic({1, 1}, NonsmoothPart::box(vec({1, 1}), vec({2, 2})), 1.0);
  const auto fp = reference_fixed_point(p);
  EXPECT_NEAR(fp.y_star[0], 1, 1e-12);
  EXPECT_NEAR(fp.y_star[1], 1, 1e-12);
}

TEST(ReferenceFixedPoint, ElasticNetMatchesLongPlainSolve) {
  const auto p = instances::elastic_net();
  const auto fp = reference_fixed_point(p);
  const GradientTypeOperator op(p);
  Vector z = Vector::Zero(p.dim());
  for (int k = 0; k < 1000000; ++k) z = op.base_step(z);
  EXPECT_LE((z - fp.z_star).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(ReferenceFixedPoint, OptimalityOfMinimizer) {
  for (const auto& p : all_instances()) {
    const auto fp = reference_fixed_point(p);
    EXPECT_LE(fp.residual, 1e-12);
    EXPECT_LE(optimality_violation(p, fp.y_star), 1e-11);
  }
}

TEST(ReferenceFixedPoint, MisstatedConstantsRejected) {
  // mu, L inconsistent with the spectrum of A
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = 5;
  EXPECT_THROW(SmoothPart::quadratic(a, Vector::Zero(2), 1.0, 2.0), InputError);
}

TEST(Constants, StrongConvexityAndSmoothness) {
  Rng rng(17);
  for (const auto& p : all_instances()) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = rng.normal_vector(p.dim(), 3);
      const Vector y = rng.normal_vector(p.dim(), 3);
      const Vector dg = p.f().gradient(x) - p.f().gradient(y);
      const Vector d = x - y;
      EXPECT_GE(dg.dot(d), p.mu() * d.squaredNorm() - 1e-9);
      EXPECT_LE(dg.norm(), p.lipschitz() * d.norm() + 1e-9);
    }
  }
}

TEST(Constants, DefaultStepAndLimit) {
  const auto p = diag_quadratic({1, 3});
  EXPECT_DOUBLE_EQ(p.gamma(), 0.5);
  EXPECT_THROW(p.with_gamma(0.6), InputError);
  EXPECT_NO_THROW(p.with_gamma(0.1));
}

TEST(Blocks, ContiguousAndValidation) {
  const auto b = BlockPartition::contiguous(5, 2);
  EXPECT_EQ(b.block(0), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(b.block(1), (std::vector<Index>{3, 4}));
  EXPECT_THROW(BlockPartition({{0, 1}, {1, 2}}, 3), InputError);
  EXPECT_THROW(BlockPartition({{0}, {2}}, 3), InputError);
  EXPECT_THROW(BlockPartition::contiguous(2, 3), InputError);
}

TEST(Instances, BlockCoupledSpectrum) {
  const auto blocks = BlockPartition::contiguous(20, 4);
  const Matrix a = instances::block_coupled_spd(blocks, 1.0, 10.0, 2.0, 9);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-9);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 10.0 + 1e-9);
}
