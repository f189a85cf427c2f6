#include <gtest/gtest.h>

#include <cmath>

#include "motstab/errors.hpp"
#include "motstab/simplex.hpp"
#include "motstab/transport.hpp"
#include "testkit.hpp"

using namespace motstab;
using testkit::two_point;

namespace {

const DiscreteMeasure kPm1 = two_point(-1, 0.5, 1, 0.5);

Coupling row(double x, const DiscreteMeasure& kernel, double w = 1.0) { return Coupling({{x, w, kernel}}); }

}  // namespace

TEST(Simplex, SmallLp) {
  // min -x - 2y  s.t. x + y + s1 = 4, x + 3y + s2 = 6.
  LinearProgram lp(2, 4);
  lp.a(0, 0) = 1; lp.a(0, 1) = 1; lp.a(0, 2) = 1;
  lp.a(1, 0) = 1; lp.a(1, 1) = 3; lp.a(1, 3) = 1;
  lp.b = {4, 6};
  lp.c = {-1, -2, 0, 0};
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 3, 1e-12);
  EXPECT_NEAR(sol.x[1], 1, 1e-12);
  EXPECT_NEAR(sol.objective, -5, 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  LinearProgram bad(2, 1);
  bad.a(0, 0) = 1; bad.a(1, 0) = 1;
  bad.b = {1, 2};
  EXPECT_EQ(solve_lp(bad).status, LpStatus::kInfeasible);

  LinearProgram open(1, 2);
  open.a(0, 0) = 1; open.a(0, 1) = -1;
  open.b = {1};
  open.c = {0, -1};
  EXPECT_EQ(solve_lp(open).status, LpStatus::kUnbounded);
}

TEST(Simplex, RedundantRowsAndNegativeRhs) {
  LinearProgram lp(3, 2);
  lp.a(0, 0) = 1; lp.a(0, 1) = 1;
  lp.a(1, 0) = 2; lp.a(1, 1) = 2;
  lp.a(2, 0) = -1;
  lp.b = {1, 2, -0.25};
  lp.c = {1, 2};
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 0.25, 1e-12);
  EXPECT_NEAR(sol.objective, 1.75, 1e-12);
}

TEST(W1d, Examples) {
  EXPECT_EQ(w_1d(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(1), 1), 1.0);
  EXPECT_EQ(w_1d(kPm1, DiscreteMeasure::dirac(0), 2), 1.0);
  EXPECT_EQ(w_1d(two_point(0, 0.5, 1, 0.5), two_point(0, 0.5, 2, 0.5), 1), 0.5);
  EXPECT_THROW(w_1d(kPm1, DiscreteMeasure::dirac(0, 2), 1), DomainError);
}

TEST(W1d, MatchesCdfOracleAndIsAMetric) {
  testkit::Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const auto a = testkit::random_measure(rng, rng.integer(1, 9), -5, 5);
    const auto b = testkit::random_measure(rng, rng.integer(1, 9), -5, 5);
    const auto c = testkit::random_measure(rng, rng.integer(1, 9), -5, 5);
    EXPECT_NEAR(w_1d(a, b, 1), testkit::w1_by_cdf(a, b), 1e-12);
    EXPECT_NEAR(w_1d(a, b, 2), w_1d(b, a, 2), 1e-14);
    EXPECT_LE(w_1d(a, c, 2), w_1d(a, b, 2) + w_1d(b, c, 2) + 1e-12);
  }
}

TEST(OtExact, Examples) {
  const auto d0 = DiscreteMeasure::dirac(0);
  const auto one = ot_exact(power_cost(d0, d0, 1), d0, d0);
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_EQ(one.entries[0].mass, 1.0);
  EXPECT_EQ(one.objective, 0.0);

  const auto ab = two_point(0, 0.5, 1, 0.5);
  const auto diag = ot_exact(power_cost(ab, ab, 1), ab, ab);
  EXPECT_EQ(diag.objective, 0.0);
  for (const auto& e : diag.entries) EXPECT_EQ(e.i, e.j);

  const auto far = two_point(2, 0.5, 3, 0.5);
  EXPECT_NEAR(ot_exact(power_cost(ab, far, 1), ab, far).objective, 2.0, 1e-15);
  EXPECT_TRUE(ot_exact(CostTable(), DiscreteMeasure(), DiscreteMeasure()).entries.empty());
  EXPECT_THROW(ot_exact(power_cost(ab, far, 1), ab, mul(far, 2)), DomainError);
}

TEST(OtExact, AgreesWithGenericLpAndQuantileFormula) {
  testkit::Rng rng(32);
  for (int t = 0; t < 60; ++t) {
    const auto a = testkit::random_measure(rng, rng.integer(1, 8), -4, 4);
    const auto b = testkit::random_measure(rng, rng.integer(1, 8), -4, 4);
    CostTable cost(a.size(), b.size());
    for (auto& v : cost.data) v = rng.uniform(0, 10);
    const auto exact = ot_exact(cost, a, b);
    EXPECT_NEAR(exact.objective, ot_lp(cost, a, b).objective, 1e-10 * (1 + exact.objective));
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0;
      for (const auto& e : exact.entries) s += e.i == i ? e.mass : 0.0;
      EXPECT_NEAR(s, a[i].weight, 1e-12);
    }
    EXPECT_NEAR(ot_exact(power_cost(a, b, 2), a, b).objective, std::pow(w_1d(a, b, 2), 2), 1e-10);
  }
}

TEST(OtExact, DegenerateTransportationProblems) {
  // Many equal weights make every north-west basis degenerate.
  std::vector<Atom> xs, ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back({static_cast<double>(i), 1.0});
    ys.push_back({static_cast<double>((i * 7) % 12) + 0.5, 1.0});
  }
  const DiscreteMeasure a(xs), b(ys);
  const auto plan = ot_exact(power_cost(a, b, 1), a, b);
  EXPECT_NEAR(plan.objective, 6.0, 1e-12);
}

TEST(Coupling, ConstructionAndMarginals) {
  const Coupling p({{1, 0.25, DiscreteMeasure::dirac(0)}, {0, 0.5, kPm1}, {1, 0.25, DiscreteMeasure::dirac(2)}});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].weight, 0.5);
  EXPECT_EQ(p[1].kernel, two_point(0, 0.5, 2, 0.5));
  EXPECT_EQ(first_marginal(p), two_point(0, 0.5, 1, 0.5));
  EXPECT_THROW(Coupling({{0, -1, kPm1}}), DomainError);
  EXPECT_THROW(Coupling({{0, 1, mul(kPm1, 2)}}), DomainError);
}

TEST(Coupling, JointRoundTrip) {
  const auto j = joint_measure(row(0, DiscreteMeasure::dirac(1)));
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0].x, 0.0);
  EXPECT_EQ(j[0].y, 1.0);
  EXPECT_EQ(j[0].mass, 1.0);
  EXPECT_EQ(second_marginal(row(0, kPm1)), kPm1);
  testkit::Rng rng(33);
  for (int t = 0; t < 50; ++t) {
    const auto p = testkit::random_coupling(rng, rng.integer(1, 6), 5, -3, 3, rng.uniform(0.5, 2));
    EXPECT_LE(testkit::joint_diff(from_joint(joint_measure(p)), p), 1e-15);
  }
}

TEST(AwDistance, ShrinkingRowsKeepKernelGap) {
  for (int k : {1, 2, 5, 10}) {
    const Coupling pk({{1.0 / k, 1, DiscreteMeasure::dirac(1)}, {-1.0 / k, 1, DiscreteMeasure::dirac(-1)}});
    const Coupling p({{0, 2, kPm1}});
    EXPECT_NEAR(aw_distance(pk, p, 1).distance, 2.0 / k + 2.0, 1e-9);
    EXPECT_NEAR(aw_oracle_j_embedding(pk, p, 1), 2.0 / k + 2.0, 1e-9);
    // The plain W_1 of the joint laws does vanish.
    EXPECT_NEAR(w_joint(pk, p, 1), 2.0 / k, 1e-9);
  }
}

TEST(AwDistance, Examples) {
  testkit::Rng rng(34);
  const auto p = testkit::random_coupling(rng, 4, 3, -2, 2);
  EXPECT_EQ(aw_distance(p, p, 1).distance, 0.0);
  EXPECT_NEAR(aw_distance(p, p, 2).distance, 0.0, 1e-15);
  EXPECT_NEAR(aw_distance(row(0, kPm1), row(0, DiscreteMeasure::dirac(0)), 1).distance, 1.0, 1e-15);
  EXPECT_NEAR(aw_oracle_j_embedding(row(0, kPm1), row(0, DiscreteMeasure::dirac(0)), 1), 1.0, 1e-15);
  EXPECT_NEAR(aw_oracle_j_embedding(p, p, 1), 0.0, 1e-12);
}

TEST(AwDistance, OracleMetricAndDominance) {
  testkit::Rng rng(35);
  for (int t = 0; t < 40; ++t) {
    const auto p = testkit::random_coupling(rng, rng.integer(1, 4), 4, -3, 3);
    const auto q = testkit::random_coupling(rng, rng.integer(1, 4), 4, -3, 3);
    const auto s = testkit::random_coupling(rng, rng.integer(1, 4), 4, -3, 3);
    for (double r : {1.0, 2.0}) {
      const double pq = aw_distance(p, q, r).distance;
      EXPECT_NEAR(pq, aw_oracle_j_embedding(p, q, r), 1e-9);
      EXPECT_NEAR(pq, aw_distance(q, p, r).distance, 1e-10);
      EXPECT_LE(aw_distance(p, s, r).distance, pq + aw_distance(q, s, r).distance + 1e-9);
      EXPECT_GE(pq + 1e-9, w_joint(p, q, r));
    }
  }
}

TEST(AwDistance, ThreadCountDoesNotChangeResult) {
  testkit::Rng rng(36);
  const auto p = testkit::random_coupling(rng, 20, 6, -3, 3);
  const auto q = testkit::random_coupling(rng, 25, 6, -3, 3);
  const auto one = aw_distance(p, q, 1, 1);
  const auto four = aw_distance(p, q, 1, 4);
  EXPECT_EQ(one.distance, four.distance);
  EXPECT_EQ(one.inner_costs.data, four.inner_costs.data);
}

TEST(AwDistance, MassMismatchIsAnError) {
  EXPECT_THROW(aw_distance(row(0, kPm1), row(0, kPm1, 2.0), 1), DomainError);
}
