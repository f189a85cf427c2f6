#include <gtest/gtest.h>

#include <cmath>

#include "motstab/copula.hpp"
#include "motstab/errors.hpp"
#include "motstab/martingale.hpp"
#include "testkit.hpp"

using namespace motstab;
using testkit::two_point;

namespace {

const DiscreteMeasure kPm1 = two_point(-1, 0.5, 1, 0.5);
const DiscreteMeasure kPm2 = two_point(-2, 0.5, 2, 0.5);
const DiscreteMeasure kHalf = two_point(0, 0.5, 1, 0.5);

Coupling comonotone() {
  return Coupling({{0, 0.5, DiscreteMeasure::dirac(0)}, {1, 0.5, DiscreteMeasure::dirac(1)}});
}

double block_mass(const std::vector<UniformBlock>& blocks) {
  double s = 0;
  for (const auto& b : blocks) s += b.mass;
  return s;
}

// Measure of (lo, hi] under a block list.
double block_measure(const std::vector<UniformBlock>& blocks, double lo, double hi) {
  double s = 0;
  for (const auto& b : blocks) {
    const double a = std::max(lo, b.lo);
    const double c = std::min(hi, b.hi);
    if (c > a) s += b.mass * (c - a) / (b.hi - b.lo);
  }
  return s;
}

}  // namespace

TEST(Copula, Examples) {
  const auto single = copula_of(Coupling({{0, 1, DiscreteMeasure::dirac(1)}}));
  ASSERT_EQ(single.kernels.size(), 1u);
  EXPECT_EQ(single.u_breaks, (std::vector<double>{0, 1}));
  EXPECT_NEAR(block_measure(single.kernels[0], 0, 0.3), 0.3, 1e-15);

  const auto split = copula_of(Coupling({{0, 1, kPm1}}));
  ASSERT_EQ(split.kernels.size(), 1u);
  for (double v : {0.1, 0.5, 0.9}) EXPECT_NEAR(block_measure(split.kernels[0], 0, v), v, 1e-15);

  const auto co = copula_of(comonotone());
  EXPECT_EQ(co.u_breaks, (std::vector<double>{0, 0.5, 1}));
  EXPECT_NEAR(block_measure(co.kernels[0], 0, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(block_measure(co.kernels[1], 0.5, 1), 1.0, 1e-15);
}

TEST(Copula, KernelsMixToLebesgue) {
  testkit::Rng rng(41);
  for (int t = 0; t < 30; ++t) {
    const auto p = testkit::random_coupling(rng, rng.integer(1, 6), 4, -3, 3);
    const auto c = copula_of(p);
    for (const auto& k : c.kernels) EXPECT_NEAR(block_mass(k), 1.0, 1e-12);
    for (double v = 0.05; v < 1; v += 0.1) {
      double s = 0;
      for (std::size_t i = 0; i < c.kernels.size(); ++i) {
        s += (c.u_breaks[i + 1] - c.u_breaks[i]) * block_measure(c.kernels[i], 0, v);
      }
      EXPECT_NEAR(s, v, 1e-12);
    }
  }
}

TEST(ApproxCoupling, Examples) {
  const Coupling p({{0, 1, kPm1}});
  EXPECT_LE(testkit::joint_diff(approx_coupling(p, first_marginal(p), second_marginal(p)), p), 1e-15);

  const auto out = approx_coupling(p, DiscreteMeasure::dirac(0), kPm2);
  EXPECT_LE(testkit::joint_diff(out, Coupling({{0, 1, kPm2}})), 1e-15);
  EXPECT_NEAR(aw_distance(p, out, 1).distance, 1.0, 1e-15);

  const auto nu_k = two_point(0, 0.5, 1.5, 0.5);
  const auto co = approx_coupling(comonotone(), kHalf, nu_k);
  const Coupling want({{0, 0.5, DiscreteMeasure::dirac(0)}, {1, 0.5, DiscreteMeasure::dirac(1.5)}});
  EXPECT_LE(testkit::joint_diff(co, want), 1e-15);
  EXPECT_THROW(approx_coupling(p, DiscreteMeasure::dirac(0, 2), kPm2), DomainError);
}

TEST(ApproxCoupling, MarginalsAreExact) {
  testkit::Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto p = testkit::random_coupling(rng, rng.integer(1, 6), 4, -3, 3);
    const auto mu_k = testkit::random_measure(rng, rng.integer(1, 7), -3, 3);
    const auto nu_k = testkit::random_measure(rng, rng.integer(1, 7), -3, 3);
    const auto out = approx_coupling(p, mu_k, nu_k);
    EXPECT_LE(testkit::max_abs_diff(first_marginal(out), mu_k), 1e-12);
    EXPECT_LE(testkit::max_abs_diff(second_marginal(out), nu_k), 1e-12);
  }
}

TEST(CheckEstimate, Examples) {
  const Coupling p({{0, 1, kPm1}});
  const auto e = check_estimate(p, approx_coupling(p, DiscreteMeasure::dirac(0), kPm2), 1);
  EXPECT_NEAR(e.lhs, 1.0, 1e-15);
  EXPECT_NEAR(e.rhs, 1.0, 1e-15);
  EXPECT_TRUE(e.holds);
  const auto same = check_estimate(p, p, 2);
  EXPECT_EQ(same.lhs, 0.0);
  EXPECT_TRUE(same.holds);
}

TEST(CheckEstimate, ReportsWithoutNesting) {
  // mu_k = delta_{1/2} merges the two jumps of mu: only reported, no claim.
  const auto p = comonotone();
  EXPECT_FALSE(jumps_nested(kHalf, DiscreteMeasure::dirac(0.5)));
  const auto e = check_estimate(p, approx_coupling(p, DiscreteMeasure::dirac(0.5), kHalf), 1);
  EXPECT_GE(e.lhs, 0.0);
  EXPECT_GE(e.rhs, 0.0);
}

TEST(CheckEstimate, HoldsUnderJumpNesting) {
  testkit::Rng rng(43);
  for (int t = 0; t < 60; ++t) {
    const auto p = testkit::random_coupling(rng, rng.integer(1, 5), 4, -3, 3);
    const auto mu_k = testkit::nested_refinement(rng, first_marginal(p));
    ASSERT_TRUE(jumps_nested(first_marginal(p), mu_k));
    const auto nu_k = testkit::random_measure(rng, rng.integer(1, 6), -3, 3);
    for (double r : {1.0, 2.0}) EXPECT_TRUE(check_estimate(p, approx_coupling(p, mu_k, nu_k), r).holds);
  }
}

TEST(ApproxCoupling, DefectBoundedByDistance) {
  testkit::Rng rng(44);
  for (int t = 0; t < 40; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 5), -2, 2);
    const auto p = testkit::random_martingale(rng, mu, 1.5);
    const auto out = approx_coupling(p, testkit::nested_refinement(rng, mu),
                                     testkit::random_measure(rng, rng.integer(2, 6), -3, 3));
    const double total = martingale_diagnostics(out, 0).mean_defect * out.total_mass();
    EXPECT_LE(total, aw_distance(p, out, 1).distance + 1e-12);
  }
}

TEST(ApproxCoupling, ConvergesAlongRefinements) {
  testkit::Rng rng(45);
  const auto mu = testkit::random_measure(rng, 4, -2, 2);
  const auto p = testkit::random_martingale(rng, mu, 1.0);
  const auto nu = second_marginal(p);
  double prev = INFINITY;
  for (double h : {0.4, 0.2, 0.1, 0.05, 0.01}) {
    const auto mu_k = pushforward(mu, [h](double x) { return x + h; });
    const auto nu_k = pushforward(nu, [h](double y) { return y - h; });
    const double d = aw_distance(p, approx_coupling(p, mu_k, nu_k), 1).distance;
    EXPECT_LE(d, prev + 1e-12);
    EXPECT_LE(d, 2 * (w_1d(mu, mu_k, 1) + w_1d(nu, nu_k, 1)) + 1e-6);
    prev = d;
  }
}
