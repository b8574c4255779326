#include "corectron/lifting.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace corectron;
using namespace corectron::lifting;
using corectron::testing::random_vector;

TEST(Kernel, RbfIsOneAtZeroDistanceAndSymmetric) {
  std::mt19937_64 rng(1);
  const auto k = KernelSpec::rbf(0.7);
  for (int i = 0; i < 20; ++i) {
    const Vector a = random_vector(rng, 4), b = random_vector(rng, 4);
    EXPECT_DOUBLE_EQ(k(a, a), 1.0);
    EXPECT_DOUBLE_EQ(k(a, b), k(b, a));
    EXPECT_GT(k(a, b), 0.0);
  }
}

TEST(Kernel, RbfClosedForm) {
  const Vector a{{0.0, 0.0}}, b{{1.0, 1.0}};
  EXPECT_NEAR(KernelSpec::rbf(2.0)(a, b), std::exp(-2.0 / 8.0), 1e-15);
}

TEST(Kernel, LinearDotIsInnerProduct) {
  const Vector a{{1.0, 2.0}}, b{{3.0, -1.0}};
  EXPECT_DOUBLE_EQ(KernelSpec::linear_dot()(a, b), 1.0);
}

TEST(Kernel, RejectsBadBandwidth) { EXPECT_THROW(KernelSpec::rbf(0.0), std::invalid_argument); }

TEST(Adjoint, IdentityReturnsInput) {
  const Vector w{{1.0, 2.0}};
  EXPECT_EQ(adjoint_apply(ContextMap::identity(2), w), w);
}

TEST(Adjoint, LinearContextIsMatrixVectorProduct) {
  // W = I_2 stored column-major as (1, 0, 0, 1).
  const Vector w{{1.0, 0.0, 0.0, 1.0}};
  const Vector out = adjoint_apply(ContextMap::linear_context(2, Vector{{3.0, 4.0}}), w);
  EXPECT_EQ(out, (Vector{{3.0, 4.0}}));
}

TEST(Adjoint, EmptyRepresentationGivesZero) {
  const auto map = ContextMap::kernel_feature(3, Vector{{0.1, 0.2}}, KernelSpec::rbf(1.0));
  const Vector out = adjoint_apply(map, std::span<const double>(), std::span<const ResidualRecord>());
  EXPECT_EQ(out, Vector::Zero(3));
}

TEST(Adjoint, InnerProductIdentity) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 6, p = 1 + trial % 4;
    const Vector z = random_vector(rng, static_cast<Eigen::Index>(p));
    const Vector x = random_vector(rng, static_cast<Eigen::Index>(n));
    for (const auto& map : {ContextMap::identity(n), ContextMap::linear_context(n, z)}) {
      const Vector w = random_vector(rng, static_cast<Eigen::Index>(map.lifted_dim()));
      const double lhs = w.dot(lift(map, x));
      const double rhs = adjoint_apply(map, w).dot(x);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(Adjoint, LiftIsOuterProductVec) {
  const Vector x{{1.0, 2.0, 3.0}}, z{{-1.0, 0.5}};
  const Vector v = lift(ContextMap::linear_context(3, z), x);
  const Matrix outer = x * z.transpose();
  EXPECT_EQ(v, Eigen::Map<const Vector>(outer.data(), 6));
}

TEST(Adjoint, DimensionMismatchThrows) {
  EXPECT_THROW(adjoint_apply(ContextMap::identity(3), Vector::Ones(2)), DimensionError);
  EXPECT_THROW(lift(ContextMap::linear_context(2, Vector::Ones(2)), Vector::Ones(3)), DimensionError);
}

TEST(GramEntry, Examples) {
  const Vector ones{{1.0, 1.0}};
  EXPECT_DOUBLE_EQ(gram_entry(ContextMap::identity(2), ones, ContextMap::identity(2), ones), 2.0);
  const Vector z{{0.6, 0.8}};
  const auto lc = ContextMap::linear_context(2, z);
  EXPECT_NEAR(gram_entry(lc, ones, lc, ones), 2.0, 1e-15);
  const auto kf = ContextMap::kernel_feature(2, z, KernelSpec::rbf(1.0));
  EXPECT_EQ(gram_entry(kf, Vector{{1.0, 0.0}}, kf, Vector{{0.0, 1.0}}), 0.0);
}

TEST(GramEntry, LinearContextEqualsFrobeniusProductOfLifts) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector zs = random_vector(rng, 3), zt = random_vector(rng, 3);
    const Vector gs = random_vector(rng, 4), gt = random_vector(rng, 4);
    const auto ms = ContextMap::linear_context(4, zs), mt = ContextMap::linear_context(4, zt);
    EXPECT_NEAR(gram_entry(ms, gs, mt, gt), lift(ms, gs).dot(lift(mt, gt)), 1e-12);
  }
}

TEST(GramEntry, LinearDotKernelMatchesLinearContextExactly) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector zs = random_vector(rng, 5), zt = random_vector(rng, 5);
    const Vector gs = random_vector(rng, 3), gt = random_vector(rng, 3);
    const double a = gram_entry(ContextMap::linear_context(3, zs), gs, ContextMap::linear_context(3, zt), gt);
    const double b = gram_entry(ContextMap::kernel_feature(3, zs, KernelSpec::linear_dot()), gs,
                                ContextMap::kernel_feature(3, zt, KernelSpec::linear_dot()), gt);
    EXPECT_EQ(a, b);
  }
}

TEST(GramEntry, MixedVariantsThrow) {
  const Vector g = Vector::Ones(2);
  EXPECT_THROW(gram_entry(ContextMap::identity(2), g, ContextMap::linear_context(2, Vector::Ones(2)), g),
               std::invalid_argument);
  EXPECT_THROW(gram_entry(ContextMap::kernel_feature(2, g, KernelSpec::rbf(1.0)), g,
                          ContextMap::kernel_feature(2, g, KernelSpec::rbf(2.0)), g),
               std::invalid_argument);
}

TEST(GramMatrix, SymmetricPsdAndBoundedOperatorNorm) {
  std::mt19937_64 rng(5);
  const auto kernel = KernelSpec::rbf(0.8);
  std::vector<ResidualRecord> history;
  const double X = 1.0;
  for (int t = 0; t < 60; ++t) {
    Vector z = random_vector(rng, 3);
    z /= std::max(1.0, z.norm());
    Vector g = random_vector(rng, 4);
    g *= X / std::max(X, g.norm());
    history.push_back({ContextMap::kernel_feature(4, z, kernel), g});
  }
  const Matrix K = gram_matrix(history);
  EXPECT_EQ(K, K.transpose());
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(K).eigenvalues();
  EXPECT_GE(ev.minCoeff(), -1e-10 * ev.maxCoeff());
  // kappa = 1 for the RBF kernel.
  EXPECT_LE(ev.maxCoeff(), static_cast<double>(history.size()) * X * X);
}

TEST(Representer, AdjointOfCoefficientsMatchesExplicitSum) {
  std::mt19937_64 rng(6);
  std::vector<ResidualRecord> history;
  std::vector<double> coeffs;
  Vector w = Vector::Zero(8);
  for (int s = 0; s < 10; ++s) {
    const Vector z = random_vector(rng, 2), g = random_vector(rng, 4);
    const auto map = ContextMap::linear_context(4, z);
    history.push_back({map, g});
    coeffs.push_back(random_vector(rng, 1)(0));
    w += coeffs.back() * lift(map, g);
  }
  const auto now = ContextMap::linear_context(4, random_vector(rng, 2));
  const Vector a = adjoint_apply(now, coeffs, history);
  EXPECT_LT((a - adjoint_apply(now, w)).norm(), 1e-12);
}
