#include <gtest/gtest.h>

#include <cmath>

#include "dergame/consumer.hpp"
#include "oracles.hpp"

using namespace dergame;

TEST(Consumer, InteriorDemand) {
  EXPECT_DOUBLE_EQ(flexible_demand(100.0, 2.0, 40.0), 30.0);
  EXPECT_DOUBLE_EQ(flexible_demand(100.0, 2.0, 120.0), 0.0);
  EXPECT_DOUBLE_EQ(flexible_demand(100.0, 2.0, -10.0), 50.0);
}

TEST(Consumer, UtilitySaturates) {
  EXPECT_DOUBLE_EQ(consumer_utility(100.0, 2.0, 10.0), 900.0);
  EXPECT_DOUBLE_EQ(consumer_utility(100.0, 2.0, 80.0), 2500.0);
  EXPECT_DOUBLE_EQ(consumer_surplus(100.0, 2.0, 10.0, 0.0, 40.0), 500.0);
}

TEST(Consumer, DemandFallsWithTariff) {
  double prev = flexible_demand(80.0, 3.0, 0.0);
  for (double pi = 1.0; pi <= 100.0; pi += 1.0) {
    const double d = flexible_demand(80.0, 3.0, pi);
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(Consumer, RejectsBadInputs) {
  EXPECT_THROW(flexible_demand(10.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(flexible_demand(10.0, 1.0, std::nan("")), std::invalid_argument);
  EXPECT_THROW(consumer_surplus(10.0, 1.0, -1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(Consumer, GridOracle) {
  const auto st = oracle::consumer_draws(200, 7);
  EXPECT_EQ(st.draws, 200);
  EXPECT_EQ(st.failures, 0) << st.example;
}
