#include <gtest/gtest.h>

#include <cmath>

#include "motstab/errors.hpp"
#include "motstab/measure.hpp"
#include "motstab/potential.hpp"
#include "testkit.hpp"

using namespace motstab;
using testkit::two_point;

namespace {

const DiscreteMeasure kHalfHalf = two_point(0.0, 0.5, 1.0, 0.5);

}  // namespace

// Oracles first: the LP oracle for i_epsilon must agree with hand values
// before it is used to judge the closed form.
TEST(MeasureOracle, KnapsackLpMatchesHandValues) {
  EXPECT_NEAR(testkit::i_epsilon_lp(two_point(0, 0.5, 2, 0.5), 0.25, 1, 0), 0.5, 1e-12);
  EXPECT_NEAR(testkit::i_epsilon_lp(two_point(-3, 0.5, 1, 0.5), 0.75, 2, 0), 4.5 + 0.25, 1e-12);
  EXPECT_NEAR(testkit::i_epsilon_lp(DiscreteMeasure::dirac(3), 2.0, 1, 0), 3.0, 1e-12);
}

TEST(MeasureOracle, CdfIntegralW1) {
  EXPECT_DOUBLE_EQ(testkit::w1_by_cdf(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(1)), 1.0);
  EXPECT_DOUBLE_EQ(testkit::w1_by_cdf(kHalfHalf, two_point(0, 0.5, 2, 0.5)), 0.5);
}

TEST(Measure, MergesAndSorts) {
  const DiscreteMeasure m({{2.0, 0.25}, {0.0, 0.5}, {2.0, 0.25}, {1.0, 0.0}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].position, 0.0);
  EXPECT_EQ(m[1].weight, 0.5);
  EXPECT_EQ(m.total_mass(), 1.0);
  EXPECT_THROW(DiscreteMeasure({{0.0, -1.0}}), DomainError);
  EXPECT_THROW(DiscreteMeasure({{NAN, 1.0}}), DomainError);
  EXPECT_TRUE(DiscreteMeasure().empty());
}

TEST(Measure, CdfExamples) {
  const auto d0 = DiscreteMeasure::dirac(0);
  EXPECT_EQ(cdf(d0, 0), 1.0);
  EXPECT_EQ(cdf_left(d0, 0), 0.0);
  EXPECT_EQ(cdf(kHalfHalf, 0.5), 0.5);
  EXPECT_EQ(cdf(kHalfHalf, 1), 1.0);
  EXPECT_EQ(cdf_left(kHalfHalf, 1), 0.5);
  EXPECT_EQ(cdf(kHalfHalf, 1e300), kHalfHalf.total_mass());
}

TEST(Measure, QuantileExamples) {
  EXPECT_EQ(quantile(kHalfHalf, 0.5), 0.0);
  EXPECT_EQ(quantile(kHalfHalf, 0.75), 1.0);
  for (double u : {1e-9, 0.3, 1.0}) EXPECT_EQ(quantile(DiscreteMeasure::dirac(3), u), 3.0);
  EXPECT_THROW(quantile(kHalfHalf, 0.0), DomainError);
  EXPECT_THROW(quantile(kHalfHalf, 1.5), DomainError);
}

TEST(Measure, QuantileCdfGaloisConnection) {
  testkit::Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto m = testkit::random_measure(rng, rng.integer(1, 10), -5, 5, rng.uniform(0.5, 2));
    for (int s = 0; s < 20; ++s) {
      const double u = rng.uniform(1e-9, m.total_mass());
      for (const Atom& a : m.atoms()) {
        EXPECT_EQ(quantile(m, u) <= a.position, u <= cdf(m, a.position));
      }
    }
  }
}

TEST(Measure, InverseTransformRoundTripIsExact) {
  testkit::Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto m = testkit::random_measure(rng, rng.integer(1, 30), -10, 10, rng.uniform(0.1, 3));
    EXPECT_EQ(measure_from_quantiles(quantile_partition(m)), m);
  }
}

TEST(Measure, BarycenterAndMoment) {
  EXPECT_EQ(barycenter(two_point(-1, 0.5, 1, 0.5)), 0.0);
  EXPECT_EQ(barycenter(DiscreteMeasure::dirac(2)), 2.0);
  EXPECT_EQ(barycenter(two_point(0, 0.25, 4, 0.75)), 3.0);
  EXPECT_THROW(barycenter(DiscreteMeasure()), DomainError);
  EXPECT_EQ(moment(two_point(-1, 0.5, 1, 0.5), 2, 0), 1.0);
  EXPECT_EQ(moment(DiscreteMeasure::dirac(5), 1, 2), 3.0);
  EXPECT_EQ(moment(two_point(0, 0.5, 2, 0.5), 1, 0), 1.0);
  EXPECT_THROW(moment(kHalfHalf, 0.5, 0), DomainError);
}

TEST(Measure, IEpsilonExamples) {
  EXPECT_NEAR(i_epsilon(two_point(0, 0.5, 2, 0.5), 0.25, 1, 0), 0.5, 1e-15);
  EXPECT_EQ(i_epsilon(kHalfHalf, 0.0, 2, 0), 0.0);
  EXPECT_EQ(i_epsilon(DiscreteMeasure::dirac(3), 2.0, 1, 0), 3.0);
}

TEST(Measure, IEpsilonMatchesLpOracle) {
  testkit::Rng rng(13);
  for (int t = 0; t < 60; ++t) {
    const auto m = testkit::random_measure(rng, rng.integer(1, 8), -4, 4);
    const double x0 = rng.uniform(-1, 1);
    for (double r : {1.0, 2.0}) {
      for (int k = 0; k <= 10; ++k) {
        const double eps = 0.1 * k;
        EXPECT_NEAR(i_epsilon(m, eps, r, x0), testkit::i_epsilon_lp(m, eps, r, x0), 1e-10);
      }
    }
  }
}

TEST(Measure, IEpsilonMonotoneAndVanishing) {
  testkit::Rng rng(14);
  for (int t = 0; t < 30; ++t) {
    const auto m = testkit::random_measure(rng, 6, -3, 3);
    const auto bigger = add(m, testkit::random_measure(rng, 3, -3, 3, 0.5));
    double prev = INFINITY;
    for (double eps = 0.5; eps > 1e-6; eps /= 3) {
      const double v = i_epsilon(m, eps, 1.5, 0.2);
      EXPECT_LE(v, i_epsilon(bigger, eps, 1.5, 0.2) + 1e-15);
      EXPECT_LE(v, prev);
      prev = v;
    }
    EXPECT_LT(prev, 1e-4);
  }
}

TEST(Measure, ScaleAboutBarycenter) {
  EXPECT_EQ(scale_about_barycenter(two_point(-1, 0.5, 1, 0.5), 2), two_point(-2, 0.5, 2, 0.5));
  EXPECT_EQ(scale_about_barycenter(kHalfHalf, 1), kHalfHalf);
  const auto m = two_point(0, 0.25, 4, 0.75);
  EXPECT_EQ(scale_about_barycenter(m, 0), DiscreteMeasure::dirac(3, 1.0));
  EXPECT_THROW(scale_about_barycenter(m, -1), DomainError);
}

TEST(Measure, ScalingIsAPeacock) {
  testkit::Rng rng(15);
  for (int t = 0; t < 40; ++t) {
    const auto m = testkit::random_measure(rng, 7, -2, 6);
    const double a = rng.uniform(0, 2);
    const double b = a + rng.uniform(0, 1);
    EXPECT_TRUE(convex_order_leq(scale_about_barycenter(m, a), scale_about_barycenter(m, b)));
  }
}

TEST(Measure, Algebra) {
  EXPECT_EQ(add(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(0)), DiscreteMeasure::dirac(0, 2));
  EXPECT_EQ(restrict(two_point(0, 0.5, 2, 0.5), Interval::closed(1, 3)), DiscreteMeasure::dirac(2, 0.5));
  EXPECT_EQ(restrict(two_point(0, 0.5, 2, 0.5), Interval::open(0, 2)), DiscreteMeasure());
  EXPECT_EQ(translate(DiscreteMeasure::dirac(1), -1), DiscreteMeasure::dirac(0));
  EXPECT_EQ(mul(kHalfHalf, 2), two_point(0, 1, 1, 1));
  EXPECT_THROW(mul(kHalfHalf, -1), DomainError);
  EXPECT_EQ(subtract(two_point(0, 0.5, 1, 0.5), DiscreteMeasure::dirac(1, 0.5), 1e-12),
            DiscreteMeasure::dirac(0, 0.5));
  EXPECT_THROW(subtract(kHalfHalf, DiscreteMeasure::dirac(0, 1.0), 1e-12), DomainError);
}
