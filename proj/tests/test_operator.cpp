#include <gtest/gtest.h>

#include "asynciter/instances.hpp"
#include "asynciter/operator.hpp"
#include "asynciter/random.hpp"

using namespace asynciter;

namespace {

ProblemInstance diag_quadratic(double a, double b, double gamma) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return ProblemInstance(SmoothPart::quadratic(m, Vector::Zero(2)), NonsmoothPart::zero(),
                         BlockPartition::contiguous(2, 2), gamma);
}

}  // namespace

TEST(Apply, ScalarOneStep) {
  const GradientTypeOperator op(instances::scalar_quadratic());
  EXPECT_EQ(op.apply(Vector::Constant(1, 5.0))[0], 0.0);
}

TEST(Apply, DiagonalQuadratic) {
  const GradientTypeOperator op(diag_quadratic(1, 3, 0.5));
  Vector x(2);
  x << 4, 2;
  const Vector out = op.apply(x);
  EXPECT_DOUBLE_EQ(out[0], 2);
  EXPECT_DOUBLE_EQ(out[1], -1);
}

TEST(Apply, MultiStepIsComposition) {
  const auto p = instances::elastic_net();
  const GradientTypeOperator one(p, 1);
  const GradientTypeOperator three(p, 3);
  Rng rng(2);
  const Vector x = rng.normal_vector(p.dim());
  EXPECT_EQ(three.apply(x), one.apply(one.apply(one.apply(x))));
}

TEST(Apply, ZeroPenaltyIsGradientStep) {
  const auto p = instances::lasso_quadratic();
  const ProblemInstance q(p.f(), NonsmoothPart::zero(), p.blocks(), p.gamma());
  const GradientTypeOperator op(q);
  Rng rng(4);
  const Vector x = rng.normal_vector(q.dim());
  EXPECT_LE((op.apply(x) - (x - q.gamma() * q.f().gradient(x))).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Apply, RejectsZeroInnerSteps) {
  EXPECT_THROW(GradientTypeOperator(instances::scalar_quadratic(), 0), InputError);
}

TEST(ContractionBound, ClosedForms) {
  EXPECT_DOUBLE_EQ(GradientTypeOperator(diag_quadratic(1, 3, 0.5), 1).contraction_bound(), 0.5);
  EXPECT_DOUBLE_EQ(GradientTypeOperator(diag_quadratic(1, 3, 0.5), 2).contraction_bound(), 0.25);
  EXPECT_DOUBLE_EQ(GradientTypeOperator(instances::scalar_quadratic()).contraction_bound(), 0.0);
}

TEST(ContractionBound, HoldsOnRandomPairs) {
  Rng rng(8);
  for (const auto& p : {instances::scalar_quadratic(), instances::lasso_quadratic(),
                        instances::box_quadratic(), instances::elastic_net()}) {
    for (std::size_t m : {1, 3}) {
      const GradientTypeOperator op(p, m);
      const double q = op.contraction_bound();
      for (int k = 0; k < 1000; ++k) {
        const Vector x = rng.normal_vector(p.dim(), 3);
        const Vector y = rng.normal_vector(p.dim(), 3);
        EXPECT_LE((op.apply(x) - op.apply(y)).norm(), (q + 1e-12) * (x - y).norm());
      }
    }
  }
}

TEST(ContractionBound, BlockCertificateOnCoupledInstances) {
  for (const auto& p : {instances::lasso_quadratic(), instances::box_quadratic()}) {
    const GradientTypeOperator op(p);
    EXPECT_LE(op.block_contraction_bound(), op.contraction_bound() + 1e-9);
  }
}

TEST(FixedPoint, ConsistentAcrossInnerSteps) {
  const auto p = instances::lasso_quadratic();
  const auto fp = reference_fixed_point(p);
  for (std::size_t m : {1, 2, 5}) {
    const GradientTypeOperator op(p, m);
    EXPECT_LE((op.apply(fp.z_star) - fp.z_star).norm(), 1e-11);
  }
}

TEST(FixedPoint, MinimizerDiffersFromFixedPointWithPenalty) {
  const auto p = instances::lasso_quadratic();
  const auto fp = reference_fixed_point(p);
  EXPECT_GT((fp.z_star - fp.y_star).norm(), 1e-6);
  EXPECT_EQ(fp.y_star, p.g().prox(fp.z_star, p.gamma()));
}
