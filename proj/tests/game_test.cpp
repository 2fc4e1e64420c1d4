#include <gtest/gtest.h>
#include <cmath>

#include "dergame/game.hpp"
#include "fixtures.hpp"

using namespace dergame;

namespace {

void expect_clean(const GameOutcome& o) {
  ASSERT_TRUE(o.ok()) << o.error;
  const auto& w = *o.welfare;
  EXPECT_LE(o.slsf1->diag.kkt.max(), 1e-6);
  EXPECT_LE(o.slsf2->diag.kkt.max(), 1e-6);
  EXPECT_LE(o.slsf1->diag.complementarity.min_form, 1e-6);
  EXPECT_NEAR(w.total, w.consumer_surplus + w.utility_surplus + w.aggregator_surplus - w.emissions_damage,
              1e-8 * std::max(1.0, std::fabs(w.total)));
  EXPECT_LE(std::fabs(w.revenue_adequacy_gap), 1e-6 * std::max(1.0, w.revenue));
}

}  // namespace

TEST(Game, TinyPoliciesSolve) {
  for (Policy p : {Policy::NEM, Policy::VS, Policy::DLMP}) {
    Scenario s = fixture::tiny();
    s.policy = p;
    auto o = run_case(s);
    expect_clean(o);
    if (!o.ok()) continue;
    const auto& g = o.slsf1->g_max;
    EXPECT_LE(g[2], s.econ.hosting[2] + 1e-6);
    EXPECT_NEAR(g[0], 0.0, 1e-9);
  }
}

TEST(Game, NemCompensationIsTheTariff) {
  Scenario s = fixture::tiny();
  auto o = run_case(s);
  ASSERT_TRUE(o.ok()) << o.error;
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(o.slsf1->pi_der[2][k], o.slsf1->tariff[k], 1e-6);
}

TEST(Game, BundledScenarioSolves) {
  Scenario s = load_scenario(fixture::data_path());
  auto o = run_case(matrix_scenario(s, "case1_dlmp_carbon"));
  expect_clean(o);
  EXPECT_LE(o.seconds, 60.0);
}

TEST(Game, SecondGameKeepsCapacityBelowHosting) {
  Scenario s = fixture::tiny();
  auto two = solve_slsf2(s, {0.0, 0.0, 8.0});
  EXPECT_NEAR(two.stranded[2], 3.0, 1e-9);
  for (int k = 0; k < 2; ++k) EXPECT_LE(two.point.flow.der[2][k], 5.0 + 1e-6);
}
