#include <cmath>

#include <gtest/gtest.h>

#include "lethargy/lethargy_constructor.hpp"
#include "lethargy/oracle.hpp"

using namespace lethargy;

namespace {

Subspace span1(double a, double b) {
  Eigen::MatrixXd m(2, 1);
  m << a, b;
  return Subspace(m);
}

} // namespace

TEST(BruteDistance, Examples) {
  Point x(2);
  x << 3, 4;
  EXPECT_NEAR(brute_distance(NormSpec(2.0), span1(1, 0), x), 4.0, 1e-4);
  Point y(2);
  y << 1, 0;
  EXPECT_NEAR(brute_distance(NormSpec(1.0), span1(1, 1), y), 1.0, 1e-4);
  EXPECT_EQ(brute_distance(NormSpec(3.0), Subspace::zero(2), x), norm(NormSpec(3.0), x));
}

TEST(BruteDistance, RefusesLargeSubspaces) {
  const Chain c = random_chain(6, {4}, 1);
  EXPECT_THROW(brute_distance(NormSpec(2.0), c[0], Point::Unit(6, 0)), InvalidArgument);
}

TEST(BruteDistance, NeverBelowSolver) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Chain c = random_chain(5, {1 + s % 3}, 100 + s);
    const Point x = random_matrix(5, 1, 200 + s).col(0);
    for (double p : {1.0, 1.5, 3.0, kInf}) {
      const double v = distance(NormSpec(p), c[0], x).value;
      const double b = brute_distance(NormSpec(p), c[0], x);
      EXPECT_GE(b, v - 1e-9);
      EXPECT_LE(b, v + 1e-4);
    }
  }
}

TEST(Verify, ConstructionPasses) {
  const NormSpec sp(2.0);
  const Chain c = random_chain(6, {1, 2, 4}, 3);
  const std::vector<double> d{1.0, 0.5, 0.25};
  const ConstructionResult r = theorem_construct(sp, c, d);
  const VerifyReport v = verify_construction(sp, c, r.x, d, 1e-6);
  EXPECT_TRUE(v.pass);
  EXPECT_TRUE(v.oracle_consistent);
  EXPECT_TRUE(v.rows[0].oracle.has_value());
}

TEST(Verify, PerturbationDetected) {
  const NormSpec sp(2.0);
  const Chain c = random_chain(6, {1, 2, 4}, 3);
  const std::vector<double> d{1.0, 0.5, 0.25};
  const double tol = 1e-6;
  const ConstructionResult r = theorem_construct(sp, c, d);
  const Point y = witness(sp, c[2], Subspace::whole(6));
  const Point bumped = r.x + 10.0 * tol * y / norm(sp, y);
  EXPECT_FALSE(verify_construction(sp, c, bumped, d, tol).pass);
}

TEST(Verify, AllZeroTargets) {
  const Chain c = random_chain(5, {1, 3}, 4);
  EXPECT_TRUE(verify_construction(NormSpec(1.0), c, Point::Zero(5), {0.0, 0.0}, 1e-9).pass);
}

TEST(Audit, KernelIdentityAlwaysHolds) {
  for (double p : {1.0, 2.0, kInf}) {
    AuditFamily fam;
    fam.p = p;
    EXPECT_EQ(lemma_audit("kernel_identity", fam, 100, 1).passes, 100u) << "p=" << p;
  }
}

TEST(Audit, Deterministic) {
  AuditFamily fam;
  fam.p = kInf;
  const AuditReport a = lemma_audit("two_point_in_context", fam, 20, 5);
  const AuditReport b = lemma_audit("two_point_in_context", fam, 20, 5);
  EXPECT_EQ(a.passes, b.passes);
  ASSERT_EQ(a.failures.size(), b.failures.size());
  for (std::size_t i = 0; i < a.failures.size(); ++i) {
    EXPECT_EQ(a.failures[i].seed, b.failures[i].seed);
    EXPECT_EQ(a.failures[i].observed, b.failures[i].observed);
  }
}

TEST(Audit, FreeTwoPointDocumentedFailure) {
  AuditFamily fam;
  fam.p = 2.0;
  fam.q_dim = 0;
  const AuditReport r = lemma_audit("two_point_free", fam, 10, 3);
  ASSERT_FALSE(r.failures.empty());
  const AuditTrial &t = r.failures.front();
  EXPECT_EQ(t.seed, audit_trial_seed(3, 0));
  EXPECT_NEAR(t.observed, std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(t.claimed, 1.0, 1e-12);
  const AuditTrial again = audit_trial("two_point_free", fam, t.seed, 0);
  EXPECT_EQ(again.observed, t.observed);
  EXPECT_EQ(again.config, t.config);
}

TEST(Audit, FiniteLemmaHolds) {
  AuditFamily fam;
  fam.p = 1.0;
  EXPECT_EQ(lemma_audit("finite", fam, 30, 2).passes, 30u);
}

TEST(Audit, UnknownLemma) {
  EXPECT_THROW(lemma_audit("nope", AuditFamily{}, 5, 1), InvalidArgument);
  EXPECT_THROW(lemma_audit("finite", AuditFamily{}, 0, 1), InvalidArgument);
}
