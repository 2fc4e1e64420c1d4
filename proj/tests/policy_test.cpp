#include <gtest/gtest.h>
#include <cmath>

#include "dergame/policy.hpp"
#include "fixtures.hpp"

using namespace dergame;

TEST(Policy, NemIsUniform) {
  auto c = nem_price({10.0, 30.0}, 3);
  EXPECT_EQ(c.kind, Policy::NEM);
  for (int b = 0; b < 3; ++b) EXPECT_DOUBLE_EQ(c.at(b, 1), 30.0);
  EXPECT_LE(c.spatial_variance(), 1e-12);
}

TEST(Policy, ValueStackAddsCongestionIntoTheNode) {
  Scenario s = fixture::tiny();
  // lines: a-b, b-c
  auto c = vs_price({20.0, 30.0}, 40.0, {0.5, 0.6}, {0.0, 7.0}, s.network);
  const int a = s.network.index("a"), b = s.network.index("b"), cc = s.network.index("c");
  EXPECT_DOUBLE_EQ(c.at(a, 0), 20.0 + 40.0 * 0.5);
  EXPECT_DOUBLE_EQ(c.at(b, 1), 30.0 + 40.0 * 0.6);
  EXPECT_DOUBLE_EQ(c.at(cc, 1), 30.0 + 40.0 * 0.6 + 7.0);
  EXPECT_GT(c.spatial_variance(), 0.0);
}

TEST(Policy, DlmpPassesDualsThrough) {
  auto c = dlmp_price({{10.0, 11.0}, {12.0, 13.0}});
  EXPECT_EQ(c.kind, Policy::DLMP);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 12.0);
  EXPECT_THROW(dlmp_price({{1.0}, {1.0, 2.0}}), std::invalid_argument);
}
