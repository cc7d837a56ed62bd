#include <cmath>

#include <gtest/gtest.h>

#include "lethargy/normed_space.hpp"
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

} // namespace

TEST(NormedSpace, EuclideanNorm) { EXPECT_DOUBLE_EQ(norm(NormSpec(2.0), vec({3, 4})), 5.0); }

TEST(NormedSpace, MaxNorm) { EXPECT_DOUBLE_EQ(norm(NormSpec::inf(), vec({1, -7, 2})), 7.0); }

TEST(NormedSpace, WeightedOneNorm) {
  EXPECT_DOUBLE_EQ(norm(NormSpec(1.0, {1.0, 2.0}), vec({1, 1})), 3.0);
}

TEST(NormedSpace, WeightedMaxNormUsesMultipliers) {
  EXPECT_DOUBLE_EQ(norm(NormSpec::inf({1.0, 3.0}), vec({2, 1})), 3.0);
}

TEST(NormedSpace, RejectsSmallExponent) {
  EXPECT_THROW(NormSpec(0.5), InvalidArgument);
  EXPECT_THROW(NormSpec(2.0, {1.0, 0.0}), InvalidArgument);
}

TEST(NormedSpace, WeightLengthChecked) {
  EXPECT_THROW(norm(NormSpec(2.0, {1.0, 2.0}), vec({1, 2, 3})), DimensionMismatch);
}

TEST(NormedSpace, DualNormExamples) {
  EXPECT_DOUBLE_EQ(dual_norm(NormSpec(2.0), vec({3, 4})), 5.0);
  EXPECT_DOUBLE_EQ(dual_norm(NormSpec(1.0), vec({1, -7})), 7.0);
}

TEST(NormedSpace, DualNormP3MatchesGridSupremum) {
  // Supremum of f(x) over a fine grid of the p=3 unit circle.
  double best = 0.0;
  const int steps = 200000;
  for (int i = 0; i < steps; ++i) {
    const double t = 2.0 * M_PI * i / steps;
    const double c = std::cos(t), s = std::sin(t);
    const double n = std::cbrt(std::pow(std::abs(c), 3) + std::pow(std::abs(s), 3));
    best = std::max(best, (c + s) / n);
  }
  const double d = dual_norm(NormSpec(3.0), vec({1, 1}));
  EXPECT_NEAR(d, best, 1e-8);
  EXPECT_NEAR(d, std::pow(2.0, 2.0 / 3.0), 1e-12);
}

TEST(NormedSpace, DualSpaceRoundTrip) {
  const NormSpec sp(3.0, {1.0, 2.0, 0.5});
  const NormSpec dd = sp.dual().dual();
  const Point x = vec({0.3, -1.2, 2.0});
  EXPECT_NEAR(norm(dd, x), norm(sp, x), 1e-12);
  const NormSpec inf = NormSpec::inf({2.0, 4.0});
  EXPECT_NEAR(norm(inf.dual(), vec({1, 1})), 0.5 + 0.25, 1e-15);
}

TEST(NormedSpace, NormingFunctionalExamples) {
  const Functional f2 = norming_functional(NormSpec(2.0), vec({3, 4}));
  EXPECT_NEAR(f2.coeffs(0), 0.6, 1e-15);
  EXPECT_NEAR(f2.coeffs(1), 0.8, 1e-15);

  const Functional f1 = norming_functional(NormSpec(1.0), vec({1, -2}));
  EXPECT_DOUBLE_EQ(f1.coeffs(0), 1.0);
  EXPECT_DOUBLE_EQ(f1.coeffs(1), -1.0);
  EXPECT_DOUBLE_EQ(f1(vec({1, -2})), 3.0);
  EXPECT_DOUBLE_EQ(f1.dual_norm, 1.0);

  const Functional fi = norming_functional(NormSpec::inf(), vec({1, 3}));
  EXPECT_DOUBLE_EQ(fi.coeffs(0), 0.0);
  EXPECT_DOUBLE_EQ(fi.coeffs(1), 1.0);
}

TEST(NormedSpace, NormingFunctionalOfZeroThrows) {
  EXPECT_THROW(norming_functional(NormSpec(2.0), Point::Zero(3)), InvalidArgument);
}

TEST(NormedSpace, WeightedNormingFunctional) {
  for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
    const NormSpec sp(p, {0.5, 2.0, 3.0});
    const Point x = vec({1.0, -0.25, 0.7});
    const Functional f = norming_functional(sp, x);
    EXPECT_NEAR(f(x), norm(sp, x), 1e-9) << "p=" << p;
    EXPECT_NEAR(dual_norm(sp, f), 1.0, 1e-9) << "p=" << p;
  }
}
