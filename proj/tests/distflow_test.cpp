#include <gtest/gtest.h>
#include <cmath>

#include <algorithm>

#include "dergame/distflow.hpp"
#include "fixtures.hpp"

using namespace dergame;

namespace {

struct Tiny {
  Scenario s = fixture::tiny();
  LlInputs in;
  std::vector<std::vector<double>> dp, dq;
  Tiny(double load_c, double pi_der) {
    const int B = 3, K = 2;
    dp.assign(B, std::vector<double>(K)), dq.assign(B, std::vector<double>(K));
    in.demand_p.assign(B, std::vector<QuadExpr>(K));
    in.demand_q.assign(B, std::vector<QuadExpr>(K));
    in.pi_der.assign(B, std::vector<QuadExpr>(K, QuadExpr(pi_der)));
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) {
        dp[b][k] = s.demand.inflexible_p[b][k] + (b == 2 ? load_c : 1.0);
        dq[b][k] = s.demand.inflexible_q[b][k];
        in.demand_p[b][k] = dp[b][k];
        in.demand_q[b][k] = dq[b][k];
      }
    in.der_capacity = {0.0, 0.0, 2.0};
  }
};

}  // namespace

TEST(Distflow, BalancesAndLimitsHold) {
  Tiny t(0.0, 10.0);
  auto sol = solve_ll(t.s, t.in);
  ASSERT_EQ(sol.status, NlpStatus::Optimal);
  EXPECT_LE(balance_residuals(sol.state, t.s, t.dp, t.dq).max_abs(), 1e-6);
  for (const auto& row : voltage_residuals(sol.state, t.s.network))
    for (double r : row) EXPECT_LE(std::fabs(r), 1e-6);
  for (const auto& row : capacity_violation(sol.state, t.s.network))
    for (double r : row) EXPECT_LE(r, 1e-6);
}

TEST(Distflow, CheapDerIsDispatchedFirst) {
  Tiny t(0.0, 10.0);
  auto sol = solve_ll(t.s, t.in);
  // availability is kappa f g = 0.5 * 2 and 0.8 * 2
  EXPECT_NEAR(sol.state.der[2][0], 1.0, 1e-6);
  EXPECT_NEAR(sol.state.der[2][1], 1.6, 1e-6);
  Tiny dear(0.0, 500.0);
  auto none = solve_ll(dear.s, dear.in);
  EXPECT_NEAR(none.state.der[2][1], 0.0, 1e-6);
}

TEST(Distflow, CongestionPricesTheDownstreamNode) {
  Tiny t(6.0, 200.0);
  auto sol = solve_ll(t.s, t.in);
  ASSERT_EQ(sol.status, NlpStatus::Optimal);
  const int l = t.s.network.line_into(2);
  EXPECT_GT(sol.tau_bar[l], 1.0);
  const auto& bp = sol.model.balance_p;
  const double wk = t.s.times.duration[1];
  EXPECT_GT(sol.row_duals[bp[2][1]] / wk, sol.row_duals[bp[1][1]] / wk + 1.0);
  EXPECT_GT(sol.state.gen_p[1][1], 0.0);  // the local unit covers the shortfall
}

TEST(Distflow, EmissionsFollowUnits) {
  Tiny t(0.0, 500.0);
  auto sol = solve_ll(t.s, t.in);
  auto e = emissions(sol.state, t.s);
  double by = 0.0;
  for (double v : e.by_node) by += v;
  EXPECT_NEAR(by, e.total, 1e-9);
  double expect = 0.0;
  for (int k = 0; k < 2; ++k)
    expect += t.s.times.duration[k] * t.s.econ.grid_emission_factor * sol.state.root_p[k];
  EXPECT_NEAR(e.interface, expect, 1e-6);
}
