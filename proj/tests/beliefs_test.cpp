#include <gtest/gtest.h>
#include <cmath>

#include "dergame/beliefs.hpp"
#include "fixtures.hpp"

using namespace dergame;

TEST(Beliefs, CompleteInfoSeesTruth) {
  Scenario s = fixture::tiny();
  auto v = lower_level_view(s);
  EXPECT_EQ(v.hosting, s.econ.hosting);
  EXPECT_DOUBLE_EQ(v.demand.alpha, 1.0);
}

TEST(Beliefs, HostingStanceIsChecked) {
  Scenario s = fixture::tiny();
  BeliefModel b;
  b.hosting = {0.0, 0.0, 6.0};
  b.stance = Stance::Optimistic;
  EXPECT_EQ(apply_hosting_belief(s, b)[2], 6.0);
  b.stance = Stance::Pessimistic;
  EXPECT_THROW(apply_hosting_belief(s, b), ValidationError);
  b.hosting = {0.0, 0.0};
  EXPECT_THROW(apply_hosting_belief(s, b), ValidationError);
}

TEST(Beliefs, DemandBeliefScales) {
  Scenario s = fixture::tiny();
  BeliefModel b;
  b.alpha_demand = 1.2;
  b.stance = Stance::Optimistic;
  EXPECT_DOUBLE_EQ(apply_demand_belief(s, b).alpha, 1.2);
  b.alpha_demand = 0.0;
  EXPECT_THROW(apply_demand_belief(s, b), ValidationError);
  b.alpha_demand = 0.8;
  EXPECT_THROW(apply_demand_belief(s, b), ValidationError);
}

TEST(Beliefs, CaseSelectsWhatTheUtilityMisreads) {
  Scenario s = fixture::tiny();
  s.info = InfoCase::HostingAsym;
  s.stance = Stance::Pessimistic;
  s.beliefs = default_beliefs(s, s.info, s.stance);
  auto v = lower_level_view(s);
  EXPECT_DOUBLE_EQ(v.hosting[2], 0.8 * 5.0);
  EXPECT_DOUBLE_EQ(v.demand.alpha, 1.0);
  s.info = InfoCase::BothAsym;
  s.beliefs = default_beliefs(s, s.info, s.stance);
  v = lower_level_view(s);
  EXPECT_DOUBLE_EQ(v.hosting[2], 4.0);
  EXPECT_DOUBLE_EQ(v.demand.alpha, 0.8);
  s.beliefs.reset();
  EXPECT_THROW(lower_level_view(s), ValidationError);
}
