#include <gtest/gtest.h>
#include <cmath>

#include "dergame/welfare.hpp"
#include "fixtures.hpp"

using namespace dergame;

TEST(Welfare, TouStructure) {
  TimeStructure t;
  t.intervals = 4;
  t.duration.assign(4, 1.0);
  t.peak = {1, 2};
  auto [pk, off] = tou_structure({10.0, 30.0, 30.0, 10.0}, t);
  ASSERT_EQ(pk.size(), 1u);
  EXPECT_DOUBLE_EQ(pk[0], 30.0);
  EXPECT_DOUBLE_EQ(off[0], 10.0);
  EXPECT_THROW(tou_structure({10.0, 30.0, 31.0, 10.0}, t), TouStructureError);
}

TEST(Welfare, ComponentsSumToTotal) {
  Scenario s = fixture::tiny();
  MarketPoint pt;
  pt.tariff = {40.0, 55.0};
  pt.demand = {{5.0, 4.0}, {5.0, 4.0}, {3.0, 2.0}};
  pt.flow = FlowState::zeros(s);
  for (int k = 0; k < 2; ++k) {
    double load = 0.0;
    for (int b = 0; b < 3; ++b) load += pt.demand[b][k] + s.demand.inflexible_p[b][k];
    pt.flow.der[2][k] = 1.0;
    pt.flow.gen_p[0][k] = 2.0;
    pt.flow.root_p[k] = load - 3.0;
  }
  pt.g_max = {0.0, 0.0, 2.0};
  pt.pi_der = {{0.0, 0.0}, {0.0, 0.0}, {60.0, 60.0}};
  for (bool carbon : {false, true}) {
    s.carbon = carbon;
    auto w = objective(pt, s);
    const double sum = w.consumer_surplus + w.utility_surplus + w.aggregator_surplus - w.emissions_damage;
    EXPECT_NEAR(w.total, sum, 1e-8 * std::max(1.0, std::fabs(w.total)));
    EXPECT_GT(w.emissions, 0.0);
  }
  s.carbon = false;
  s.econ.carbon_env_cost = s.econ.carbon_penalty = 0.0;
  EXPECT_NEAR(objective(pt, s).emissions_damage, 0.0, 1e-12);
}

TEST(Welfare, RevenueAdequacyMovesWithTariff) {
  Scenario s = fixture::tiny();
  MarketPoint pt;
  pt.tariff = {40.0, 40.0};
  pt.demand.assign(3, {1.0, 1.0});
  pt.flow = FlowState::zeros(s);
  pt.g_max = {0.0, 0.0, 0.0};
  pt.pi_der.assign(3, {0.0, 0.0});
  const double g0 = revenue_adequacy_gap(pt, s);
  pt.tariff = {41.0, 41.0};
  const double g1 = revenue_adequacy_gap(pt, s);
  double energy = 0.0;
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 2; ++k) energy += s.times.duration[k] * (1.0 + s.demand.inflexible_p[b][k]);
  EXPECT_NEAR(std::fabs(g1 - g0), energy, 1e-9 * energy);
}
