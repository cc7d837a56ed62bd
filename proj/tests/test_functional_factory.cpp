#include <cmath>

#include <gtest/gtest.h>

#include "lethargy/functional_factory.hpp"
#include "lethargy/subspace_chain.hpp"

using namespace lethargy;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v)
    p(i++) = d;
  return p;
}

Subspace span1(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  m.col(0) = vec(v);
  return Subspace(m);
}

} // namespace

TEST(Annihilator, EuclideanExample) {
  const Functional f = annihilator_certificate(NormSpec(2.0), span1({1, 0}), vec({3, 4}));
  EXPECT_NEAR(f.coeffs(0), 0.0, 1e-12);
  EXPECT_NEAR(f.coeffs(1), 1.0, 1e-12);
  EXPECT_NEAR(f(vec({3, 4})), 4.0, 1e-12);
}

TEST(Annihilator, OneNormSignVector) {
  const Functional f = annihilator_certificate(NormSpec(1.0), Subspace::zero(2), vec({1, -2}));
  EXPECT_DOUBLE_EQ(f.coeffs(0), 1.0);
  EXPECT_DOUBLE_EQ(f.coeffs(1), -1.0);
  EXPECT_DOUBLE_EQ(f(vec({1, -2})), 3.0);
}

TEST(Annihilator, PointInSubspaceRejected) {
  EXPECT_THROW(annihilator_certificate(NormSpec(2.0), span1({1, 1}), vec({2, 2})),
               InvalidArgument);
}

TEST(TwoPoint, MaxNormFeasibleExample) {
  // Minimisers of max(|1 - a|, 1) on a >= 0 are [0, 2]; delta = 2, target 1.
  const TwoPointResult r =
      two_point_hahn_banach(NormSpec::inf(), Subspace::zero(2), vec({1, 0}), vec({1, 1}));
  EXPECT_NEAR(r.delta, 2.0, 1e-5);
  EXPECT_NEAR(r.target_value, 1.0, 1e-5);
  EXPECT_TRUE(r.feasible_at_norm);
  EXPECT_NEAR(r.f.coeffs(0), 1.0, 1e-5);
  EXPECT_NEAR(r.f.coeffs(1), 0.0, 1e-5);
  EXPECT_NEAR(r.achieved_dual_norm, 1.0, 1e-5);
}

TEST(TwoPoint, EuclideanInfeasibleExample) {
  const TwoPointResult r = two_point_hahn_banach(NormSpec(2.0), Subspace::zero(2), vec({1, 0}),
                                                 vec({0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(r.target_value, -1.0);
  EXPECT_FALSE(r.feasible_at_norm);
  EXPECT_NEAR(r.achieved_dual_norm, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.f.coeffs(0), 1.0, 1e-12);
  EXPECT_NEAR(r.f.coeffs(1), -1.0, 1e-12);
}

TEST(TwoPoint, MirroredFlipsSearchDirection) {
  const TwoPointResult r = two_point_hahn_banach(NormSpec::inf(), Subspace::zero(2),
                                                 vec({1, 0}), vec({1, 1}), std::nullopt, true);
  EXPECT_TRUE(r.mirrored);
  // h(a) = max(|1 + a|, 1) is minimal only at a = 0: target -(0 - 1) = 1.
  EXPECT_NEAR(r.delta, 0.0, 1e-6);
  EXPECT_NEAR(r.target_value, 1.0, 1e-6);
}

TEST(TwoPoint, RejectsDegenerateInputs) {
  EXPECT_THROW(two_point_hahn_banach(NormSpec(2.0), span1({1, 0}), vec({2, 0}), vec({0, 1})),
               InvalidArgument);
  EXPECT_THROW(two_point_hahn_banach(NormSpec(2.0), Subspace::zero(2), vec({1, 0}),
                                     vec({3, 0})),
               InvalidArgument);
}

TEST(TwoPoint, ConstraintsHoldOnRandomInputs) {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Eigen::MatrixXd m = random_matrix(5, 4, s);
    const Subspace q(m.leftCols(2));
    const Point x1 = m.col(2), x2 = m.col(3);
    for (double p : {1.0, 2.0, 3.0, kInf}) {
      const TwoPointResult r = two_point_hahn_banach(NormSpec(p), q, x1, x2);
      EXPECT_NEAR(r.f(x1), 1.0, 1e-8);
      EXPECT_NEAR(r.f(x2), r.target_value, 1e-8);
      EXPECT_LT((q.basis().transpose() * r.f.coeffs).cwiseAbs().maxCoeff(), 1e-8);
      if (r.feasible_at_norm) {
        EXPECT_NEAR(r.achieved_dual_norm * r.rho_x1, 1.0, 1e-6);
      }
      // Any f meeting the constraints has norm at least 1 / rho(x1, Q).
      EXPECT_GE(r.achieved_dual_norm * r.rho_x1, 1.0 - 1e-6);
    }
  }
}

TEST(MinNormExtension, InconsistentConstraints) {
  // x2 = 2 x1 with f(x1) = 1 forces f(x2) = 2.
  EXPECT_THROW(min_norm_extension(NormSpec(2.0), Subspace::zero(2), vec({1, 0}), vec({2, 0}), 1.0),
               InvalidArgument);
}
