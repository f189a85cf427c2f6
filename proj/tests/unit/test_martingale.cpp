#include <gtest/gtest.h>

#include <cmath>

#include "motstab/errors.hpp"
#include "motstab/martingale.hpp"
#include "motstab/potential.hpp"
#include "testkit.hpp"

using namespace motstab;
using testkit::two_point;

namespace {

const DiscreteMeasure kPm1 = two_point(-1, 0.5, 1, 0.5);
const DiscreteMeasure kPm2 = two_point(-2, 0.5, 2, 0.5);
const DiscreteMeasure kFour({{-3, 0.25}, {-1, 0.25}, {1, 0.25}, {3, 0.25}});

double scale(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return 1 + std::max(support_radius(a), support_radius(b));
}

}  // namespace

TEST(MartingaleOracle, FeasibilityLpOnExamples) {
  EXPECT_TRUE(testkit::martingale_feasible(DiscreteMeasure::dirac(0), kPm1));
  EXPECT_FALSE(testkit::martingale_feasible(kPm1, DiscreteMeasure::dirac(0)));
}

TEST(Diagnostics, Examples) {
  const auto d = martingale_diagnostics(Coupling({{0, 1, kPm1}}), 1e-12);
  EXPECT_EQ(d.max_defect, 0.0);
  EXPECT_TRUE(d.is_martingale);
  const auto bad = martingale_diagnostics(Coupling({{0, 1, DiscreteMeasure::dirac(1)}}), 1e-12);
  EXPECT_EQ(bad.max_defect, 1.0);
  EXPECT_FALSE(bad.is_martingale);
  const auto id = martingale_diagnostics(identity_coupling(two_point(0, 0.5, 1, 0.5)), 0);
  EXPECT_EQ(id.max_defect, 0.0);
  EXPECT_GE(bad.max_defect, bad.mean_defect);
}

TEST(Strassen, Examples) {
  EXPECT_EQ(strassen_coupling(DiscreteMeasure::dirac(0), kPm1), Coupling({{0, 1, kPm1}}));
  EXPECT_EQ(strassen_coupling(kFour, kFour), identity_coupling(kFour));
  const auto p = strassen_coupling(kPm1, kPm2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0].kernel[0].weight, 0.75, 1e-15);
  EXPECT_NEAR(p[0].kernel[1].weight, 0.25, 1e-15);
  EXPECT_NEAR(p[1].kernel[0].weight, 0.25, 1e-15);
  EXPECT_NEAR(p[1].kernel[1].weight, 0.75, 1e-15);
}

TEST(Strassen, SoundOnOrderedPairs) {
  testkit::Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 6), -3, 3);
    const auto nu = testkit::random_spread(rng, mu, rng.integer(1, 5), 2);
    const auto p = strassen_coupling(mu, nu);
    EXPECT_LE(martingale_diagnostics(p, 0).max_defect, 1e-9 * scale(mu, nu));
    EXPECT_LE(testkit::max_abs_diff(first_marginal(p), mu), 1e-12);
    EXPECT_LE(testkit::max_abs_diff(second_marginal(p), nu), 1e-12);
  }
}

TEST(Strassen, RejectsReversedPairs) {
  testkit::Rng rng(52);
  for (int t = 0; t < 30; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(2, 6), -3, 3);
    const auto nu = testkit::random_spread(rng, mu, rng.integer(1, 5), 2);
    try {
      strassen_coupling(nu, mu);
      ADD_FAILURE() << "expected ConvexOrderViolation";
    } catch (const ConvexOrderViolation& e) {
      EXPECT_GT(potential_of(nu)(e.witness()), potential_of(mu)(e.witness()));
    }
  }
}

TEST(MinCost, Examples) {
  EXPECT_EQ(transport_cost(min_cost_martingale(kFour, kFour)), 0.0);
  const auto one = min_cost_martingale(DiscreteMeasure::dirac(0), kPm1);
  EXPECT_NEAR(transport_cost(one), 1.0, 1e-15);
  EXPECT_LE(transport_cost(one), 2 * w_1d(DiscreteMeasure::dirac(0), kPm1, 1));
  // Each row moves ¾ of its mass by 1 and ¼ by 3: total cost 1.5.
  const auto two = min_cost_martingale(kPm1, kPm2);
  EXPECT_NEAR(transport_cost(two), 1.5, 1e-12);
  EXPECT_LE(transport_cost(two), 2 * w_1d(kPm1, kPm2, 1));
}

TEST(MinCost, BetweenW1AndTwiceW1) {
  testkit::Rng rng(53);
  for (int t = 0; t < 40; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 5), -3, 3);
    const auto nu = testkit::random_spread(rng, mu, rng.integer(1, 4), 1.5);
    const auto p = min_cost_martingale(mu, nu);
    EXPECT_LE(transport_cost(p), 2 * w_1d(mu, nu, 1) + 1e-9);
    // No coupling of the pair is cheaper than W_1.
    EXPECT_GE(transport_cost(p), w_1d(mu, nu, 1) - 1e-12);
  }
}

TEST(Compose, Examples) {
  const Coupling p({{0, 1, kPm1}});
  const Coupling m({{-1, 0.5, two_point(-2, 0.5, 0, 0.5)}, {1, 0.5, two_point(0, 0.5, 2, 0.5)}});
  EXPECT_EQ(compose(p, identity_coupling(kPm1)), p);
  const auto pm = compose(p, m);
  EXPECT_EQ(pm, Coupling({{0, 1, DiscreteMeasure({{-2, 0.25}, {0, 0.5}, {2, 0.25}})}}));
  EXPECT_EQ(compose(identity_coupling(kPm1), m), m);
  EXPECT_THROW(compose(p, identity_coupling(kPm2)), DomainError);
}

TEST(Compose, PreservesMartingales) {
  testkit::Rng rng(54);
  for (int t = 0; t < 30; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 5), -2, 2);
    const auto p = testkit::random_martingale(rng, mu, 1.0);
    const auto m = testkit::random_martingale(rng, second_marginal(p), 1.0);
    const double bound = martingale_diagnostics(p, 0).max_defect + martingale_diagnostics(m, 0).max_defect;
    EXPECT_LE(martingale_diagnostics(compose(p, m), 0).max_defect, bound + 1e-12);
  }
}

TEST(DecomposeCoupling, Examples) {
  const Coupling single({{0, 1, kPm1}});
  const auto one = decompose_coupling(single, irreducible_components(DiscreteMeasure::dirac(0), kPm1));
  ASSERT_EQ(one.parts.size(), 1u);
  EXPECT_EQ(one.parts[0], single);
  EXPECT_TRUE(one.identity_part.empty());

  const auto none = decompose_coupling(identity_coupling(kFour), irreducible_components(kFour, kFour));
  EXPECT_TRUE(none.parts.empty());
  EXPECT_EQ(none.identity_part, identity_coupling(kFour));

  const auto d = irreducible_components(kPm2, kFour);
  const auto two = decompose_coupling(strassen_coupling(kPm2, kFour), d);
  ASSERT_EQ(two.parts.size(), 2u);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_LE(martingale_diagnostics(two.parts[n], 0).max_defect, 1e-15);
    EXPECT_LE(testkit::max_abs_diff(second_marginal(two.parts[n]), d.components[n].nu), 1e-15);
  }
}

TEST(DecomposeCoupling, Resums) {
  testkit::Rng rng(55);
  for (int t = 0; t < 40; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 5), -4, 4);
    const auto nu = testkit::random_spread(rng, mu, rng.integer(0, 3), 1.0);
    const auto p = strassen_coupling(mu, nu);
    const auto parts = decompose_coupling(p, irreducible_components(mu, nu));
    Coupling sum = parts.identity_part;
    for (const auto& part : parts.parts) {
      sum = add(sum, part);
      EXPECT_LE(martingale_diagnostics(part, 0).max_defect, 1e-9 * scale(mu, nu));
    }
    EXPECT_LE(testkit::joint_diff(sum, p), 1e-12);
  }
}

TEST(Slice, Examples) {
  const auto p = strassen_coupling(kPm1, kPm2);
  const auto all = slice_pair_by_quantiles(p, {{0.0, 1.0}});
  ASSERT_EQ(all.slices.size(), 1u);
  EXPECT_EQ(all.slices[0].coupling, p);
  EXPECT_TRUE(all.remainder.coupling.empty());

  const auto none = slice_pair_by_quantiles(p, {});
  EXPECT_TRUE(none.slices.empty());
  EXPECT_EQ(none.remainder.coupling, p);

  const auto halves = slice_pair_by_quantiles(p, {{0.0, 0.5}, {0.5, 1.0}});
  ASSERT_EQ(halves.slices.size(), 2u);
  EXPECT_EQ(halves.slices[0].mu, DiscreteMeasure::dirac(-1, 0.5));
  EXPECT_EQ(halves.slices[1].mu, DiscreteMeasure::dirac(1, 0.5));
  for (const auto& s : halves.slices) EXPECT_TRUE(convex_order_leq(s.mu, s.nu));
  EXPECT_THROW(slice_pair_by_quantiles(p, {{0.0, 0.6}, {0.5, 1.0}}), DomainError);
}

TEST(Slice, MassIdentityAndResum) {
  testkit::Rng rng(56);
  for (int t = 0; t < 40; ++t) {
    const auto mu = testkit::random_measure(rng, rng.integer(1, 6), -3, 3);
    const auto p = testkit::random_martingale(rng, mu, 1.0);
    const double a = rng.uniform(0, 0.4);
    const double b = rng.uniform(0.4, 0.7);
    const double c = rng.uniform(0.7, 1.0);
    const auto s = slice_pair_by_quantiles(p, {{a, b}, {b, c}});
    double mass = s.remainder.mu.total_mass();
    Coupling sum = s.remainder.coupling;
    for (const auto& sl : s.slices) {
      mass += sl.mu.total_mass();
      sum = add(sum, sl.coupling);
      EXPECT_TRUE(convex_order_leq(sl.mu, sl.nu));
    }
    EXPECT_NEAR(s.slices[0].mu.total_mass(), b - a, 1e-14);
    EXPECT_NEAR(mass, 1.0, 1e-14);
    EXPECT_LE(testkit::joint_diff(sum, p), 1e-14);
  }
}
