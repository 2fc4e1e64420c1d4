#include <gtest/gtest.h>
#include <cmath>

#include "dergame/aggregator.hpp"
#include "oracles.hpp"

using namespace dergame;

TEST(Aggregator, ClosedFormAndCap) {
  // kbar = 0.5, margin = 0.5 * 40 + 0.5 * 40 = 40 per MW
  const std::vector<double> f{0.5, 0.5}, pi{40.0, 40.0};
  const double g = closed_form_gmax(100.0, 1.0, f, pi, 0.0);
  EXPECT_NEAR(g, 100.0 / (0.5 * (100.0 - 40.0)), 1e-12);
  auto c = capped_gmax(100.0, 1.0, f, pi, 0.0, 2.0);
  EXPECT_TRUE(c.capped);
  EXPECT_DOUBLE_EQ(c.g_max, 2.0);
  c = capped_gmax(100.0, 1.0, f, pi, 0.0, 10.0);
  EXPECT_FALSE(c.capped);
  EXPECT_NEAR(c.g_max, g, 1e-12);
}

TEST(Aggregator, NonpositiveDenominator) {
  const std::vector<double> f{1.0}, pi{200.0};
  EXPECT_THROW(closed_form_gmax(100.0, 1.0, f, pi, 0.0), NonpositiveDenominator);
  auto c = capped_gmax(100.0, 1.0, f, pi, 0.0, 4.0);
  EXPECT_TRUE(c.nonpositive_denominator);
  EXPECT_DOUBLE_EQ(c.g_max, 4.0);
}

TEST(Aggregator, ProfitAndSplit) {
  AggregatorDecision d = offer_split(10.0, 0.5, {1.0, 0.4}, {3.0, 0.0});
  EXPECT_DOUBLE_EQ(d.distribution[0], 3.0);
  EXPECT_DOUBLE_EQ(d.transmission[0], 2.0);
  EXPECT_DOUBLE_EQ(d.transmission[1], 2.0);
  EXPECT_DOUBLE_EQ(aggregator_profit(d, {10.0, 20.0}, {30.0, 0.0}, 1.0, 5.0),
                   -50.0 + 9.0 * 2.0 + 29.0 * 3.0 + 19.0 * 2.0);
  EXPECT_THROW(offer_split(10.0, 0.5, {1.0}, {6.0}), DispatchExceedsAvailability);
  EXPECT_DOUBLE_EQ(mean_availability(0.5, {1.0, 0.4}), 0.35);
}

TEST(Aggregator, GridOracle) {
  const auto st = oracle::aggregator_draws(200, 5);
  EXPECT_EQ(st.draws, 200);
  EXPECT_EQ(st.failures, 0) << st.example;
}
