#include <cmath>

#include <gtest/gtest.h>

#include "lethargy/distance_engine.hpp"
#include "lethargy/oracle.hpp"
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

TEST(Distance, EuclideanProjection) {
  const DistanceSolution d = distance(NormSpec(2.0), span1({1, 0}), vec({3, 4}));
  EXPECT_NEAR(d.value, 4.0, 1e-12);
  EXPECT_NEAR(d.minimizer(0), 3.0, 1e-12);
  EXPECT_NEAR(d.minimizer(1), 0.0, 1e-12);
  EXPECT_NEAR(d.certificate(vec({3, 4})), 4.0, 1e-12);
}

TEST(Distance, MaxNormLine) {
  const DistanceSolution d = distance(NormSpec::inf(), span1({1, 0, 0}), vec({0, 1, 2}));
  EXPECT_NEAR(d.value, 2.0, 1e-9);
  EXPECT_LE(d.gap, 1e-9);
}

TEST(Distance, OneNormDiagonal) {
  const DistanceSolution d = distance(NormSpec(1.0), span1({1, 1}), vec({1, 0}));
  EXPECT_NEAR(d.value, 1.0, 1e-9);
  EXPECT_NEAR(brute_distance(NormSpec(1.0), span1({1, 1}), vec({1, 0})), 1.0, 1e-4);
}

TEST(Distance, GeneralExponentsMatchClosedForm) {
  // x = (1, 0, 1), Y = span (1, 1, 0): the minimiser is t = 1/2 by symmetry.
  const Subspace y = span1({1, 1, 0});
  const Point x = vec({1, 0, 1});
  for (double p : {1.5, 3.0, 5.0}) {
    const double exact = std::pow(2.0 * std::pow(0.5, p) + 1.0, 1.0 / p);
    const DistanceSolution d = distance(NormSpec(p), y, x);
    EXPECT_NEAR(d.value, exact, 1e-9) << "p=" << p;
    EXPECT_LE(d.gap, 1e-8) << "p=" << p;
  }
}

TEST(Distance, WeightedFrozenValues) {
  // Reference values from brute_distance, frozen.
  Eigen::MatrixXd b(4, 2);
  b << 1, 0, 0, 1, 1, 1, 0, -1;
  const Subspace y(b);
  const Point x = vec({2, -1, 0.5, 3});
  const std::vector<double> w{1, 2, 0.5, 1};
  const std::pair<double, double> table[] = {{1.0, 2.25},
                                             {1.5, 1.86086418427223},
                                             {2.0, 1.63554272337961},
                                             {3.0, 1.40121577925505},
                                             {kInf, 4.0 / 3.0}};
  for (const auto &[p, v] : table) {
    const NormSpec sp(p, w);
    EXPECT_NEAR(distance(sp, y, x).value, v, 1e-9) << "p=" << p;
    EXPECT_NEAR(brute_distance(sp, y, x), v, 1e-4) << "p=" << p;
  }
}

TEST(Distance, TrivialSubspaces) {
  const NormSpec sp(3.0);
  const Point x = vec({1, -2, 2});
  EXPECT_DOUBLE_EQ(distance(sp, Subspace::zero(3), x).value, norm(sp, x));
  EXPECT_DOUBLE_EQ(distance(sp, Subspace::whole(3), x).value, 0.0);
  const DistanceSolution z = distance(sp, span1({1, 0, 0}), Point::Zero(3));
  EXPECT_DOUBLE_EQ(z.value, 0.0);
}

TEST(Distance, DependentBasisRejected) {
  Eigen::MatrixXd b(3, 2);
  b << 1, 2, 0, 0, 0, 0;
  EXPECT_THROW(distance(NormSpec(2.0), Subspace(b), vec({0, 1, 0})), InvalidArgument);
}

TEST(Distance, DistanceAlongLine) {
  const Subspace q = Subspace::zero(2);
  EXPECT_NEAR(distance_along_line(NormSpec(2.0), q, vec({0, 1}), vec({1, 0}), 1.0),
              std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(distance_along_line(NormSpec(2.0), span1({1, 1}), vec({3, 1}), vec({1, 0}), 0.0),
              distance(NormSpec(2.0), span1({1, 1}), vec({3, 1})).value, 1e-14);
}

TEST(LineSearch, StrictlyConvexUniqueMinimiser) {
  const LineSearchResult r =
      argmin_line_right(NormSpec(2.0), Subspace::zero(2), vec({0, 1}), vec({1, 0}));
  EXPECT_NEAR(r.delta, 0.0, 1e-7);
  EXPECT_NEAR(r.min_value, 1.0, 1e-12);
}

TEST(LineSearch, PolyhedralMinimiserInterval) {
  // h(a) = max(|2 - a|, 1): minimisers [1, 3].
  const LineSearchResult r =
      argmin_line_right(NormSpec::inf(), Subspace::zero(2), vec({2, 1}), vec({1, 0}));
  EXPECT_NEAR(r.lo, 1.0, 1e-5);
  EXPECT_NEAR(r.hi, 3.0, 1e-5);
  EXPECT_NEAR(r.delta, 3.0, 1e-5);
  EXPECT_NEAR(r.min_value, 1.0, 1e-9);
}

TEST(LineSearch, TwoSidedWindow) {
  // h(a) = |(3, 1) + a (1, 0)|_2 restricted to the whole line: minimiser -3.
  const LineSearchResult r = argmin_line_right(NormSpec(2.0), Subspace::zero(2), vec({3, 1}),
                                               vec({-1, 0}), -kInf, kInf);
  EXPECT_NEAR(r.delta, -3.0, 1e-6);
  EXPECT_NEAR(r.min_value, 1.0, 1e-10);
}

TEST(Ivt, PythagorasRoot) {
  const double a = ivt_solve(NormSpec(2.0), Subspace::zero(2), vec({0, 1}), vec({1, 0}), 0.0,
                             3.0, 2.0);
  EXPECT_NEAR(a, std::sqrt(3.0), 1e-9);
}

TEST(Ivt, NoStraddleThrows) {
  try {
    ivt_solve(NormSpec(2.0), Subspace::zero(2), vec({0, 1}), vec({1, 0}), 0.0, 3.0, 0.5);
    FAIL() << "expected a bracket error";
  } catch (const BracketError &e) {
    EXPECT_GT(e.value_lo, 0.5);
    EXPECT_GT(e.value_hi, 0.5);
  }
}

TEST(Ivt, AlphaBracketOfLevelRecursion) {
  // ||z' + alpha z_prev|| = 2 on [-1/2, 1/2] with z' = yhat + z_prev.
  const NormSpec sp(2.0);
  const Point zp = vec({2, 0, 0});
  const Point zj1 = vec({2, 1, 0});
  const double alpha = ivt_solve(sp, Subspace::zero(3), zj1, zp, -0.5, 0.5, 2.0);
  EXPECT_GE(alpha, -0.5);
  EXPECT_LE(alpha, 0.5);
  EXPECT_NEAR(norm(sp, zj1 + alpha * zp), 2.0, 1e-9);
}

TEST(Distance, CertificatesVanishOnSubspace) {
  const Chain c = random_chain(7, {3}, 99);
  const Point x = random_matrix(7, 1, 3).col(0);
  for (double p : {1.0, 1.3, 2.0, 2.5, kInf}) {
    const DistanceSolution d = distance(NormSpec(p), c[0], x);
    EXPECT_LT((c[0].basis().transpose() * d.certificate.coeffs).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(d.certificate.dual_norm, 1.0, 1e-12);
  }
}
