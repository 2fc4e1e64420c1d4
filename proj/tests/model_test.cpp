#include <gtest/gtest.h>
#include <cmath>

#include <set>

#include "dergame/model.hpp"
#include "fixtures.hpp"

using namespace dergame;

TEST(Model, LoadsBundledScenario) {
  Scenario s = load_scenario(fixture::data_path());
  EXPECT_EQ(s.network.nodes.size(), 7u);
  EXPECT_EQ(s.network.index(s.network.root), 0);
  const int n6 = s.network.index("6");
  EXPECT_EQ(s.network.nodes[s.network.parent(n6)], "3");
  double tightest = 1e300;
  int which = -1;
  for (std::size_t l = 0; l < s.network.lines.size(); ++l)
    if (s.network.lines[l].s_max < tightest) tightest = s.network.lines[l].s_max, which = static_cast<int>(l);
  EXPECT_EQ(which, s.network.line_into(n6));
}

TEST(Model, SerializeRoundTrips) {
  Scenario s = load_scenario(fixture::data_path());
  EXPECT_EQ(parse_scenario(serialize(s)), s);
  Scenario t = fixture::tiny();
  EXPECT_EQ(parse_scenario(serialize(t)), t);
}

TEST(Model, CycleIsRejected) {
  std::string y = fixture::tiny_yaml();
  y.replace(y.find("    - {from: b, to: c"), 0,
            "    - {from: a, to: c, resistance: 0.0004, reactance: 0.0003, s_max: 50}\n");
  try {
    parse_scenario(y);
    FAIL() << "cycle accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("radial"), std::string::npos) << e.what();
  }
}

TEST(Model, ZeroSlopeIsRejected) {
  std::string y = fixture::tiny_yaml();
  y.replace(y.find("  N: 2"), 6, "  N: 0");
  try {
    parse_scenario(y);
    FAIL() << "N = 0 accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("N must be positive"), std::string::npos) << e.what();
  }
}

TEST(Model, MalformedFileIsAParseError) {
  EXPECT_THROW(parse_scenario("network: [unclosed"), ParseError);
  EXPECT_THROW(parse_scenario("id: x\n"), ParseError);
}

TEST(Model, CaseMatrixCounts) {
  Scenario s = load_scenario(fixture::data_path());
  auto all = case_matrix(s);
  EXPECT_EQ(all.size(), 42u);
  std::set<std::string> ids;
  for (const auto& c : all) ids.insert(c.id);
  EXPECT_EQ(ids.size(), 42u);
  EXPECT_EQ(case_matrix(s, {{Policy::NEM, Policy::VS, Policy::DLMP}, {true}}).size(), 21u);
  EXPECT_EQ(case_matrix(s, {{Policy::NEM}, {false}}).size(), 7u);
  for (const auto& c : all) EXPECT_EQ(matrix_scenario(s, c.id), c);
}

TEST(Model, ScenarioIdsAreStable) {
  EXPECT_EQ(scenario_id(Policy::VS, InfoCase::CompleteInfo, Stance::NotApplicable, true),
            matrix_scenario(fixture::tiny(), scenario_id(Policy::VS, InfoCase::CompleteInfo,
                                                         Stance::NotApplicable, true)).id);
  EXPECT_THROW(matrix_scenario(fixture::tiny(), "nonsense"), ValidationError);
}
