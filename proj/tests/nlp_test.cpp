#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dergame/nlp.hpp"

using namespace dergame;

TEST(QuadExpr, ProductAndPartial) {
  QuadExpr a = QuadExpr::var(0) + 2.0;
  QuadExpr b = QuadExpr::var(1) * 3.0 - QuadExpr::var(0);
  QuadExpr p = a * b;  // (x0+2)(3x1-x0)
  std::vector<double> x{1.5, -0.5};
  EXPECT_DOUBLE_EQ(p.value(x), (1.5 + 2) * (3 * -0.5 - 1.5));
  QuadExpr d0 = p.partial(0);  // 3x1 - 2x0 - 2
  EXPECT_DOUBLE_EQ(d0.value(x), 3 * -0.5 - 2 * 1.5 - 2);
  EXPECT_THROW(p * a, std::invalid_argument);
}

TEST(Nlp, UnconstrainedQuadratic) {
  NlpProblem p;
  VarId x = p.add_var("x");
  p.set_objective((QuadExpr::var(x) - 2.0) * (QuadExpr::var(x) - 2.0), Sense::Minimize);
  auto s = solve(p);
  ASSERT_EQ(s.status, NlpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 2.0, 1e-8);
  EXPECT_LE(s.residual.max(), 1e-8);
}

TEST(Nlp, BoundAsInequalityHasMultiplierTwo) {
  NlpProblem p;
  VarId x = p.add_var("x", -kInf, kInf, 5.0);
  p.set_objective(QuadExpr::var(x) * QuadExpr::var(x), Sense::Minimize);
  p.add_geq(QuadExpr::var(x) - 1.0, "x>=1");
  auto s = solve(p);
  ASSERT_EQ(s.status, NlpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-7);
  EXPECT_NEAR(s.multipliers[0], 2.0, 1e-6);
  auto r = evaluate_kkt(p, s.x, s.multipliers);
  EXPECT_LE(r.max(), 1e-6);
}

TEST(Nlp, MaximizeProductOnSimplex) {
  NlpProblem p;
  VarId x = p.add_var("x", 0.0, kInf, 0.3);
  VarId y = p.add_var("y", 0.0, kInf, 1.2);
  p.set_objective(-(QuadExpr::var(x) * QuadExpr::var(y)), Sense::Minimize);
  p.add_eq(QuadExpr::var(x) + QuadExpr::var(y) - 2.0, "sum");
  auto s = solve(p);
  ASSERT_EQ(s.status, NlpStatus::Optimal);
  EXPECT_NEAR(s.x[x], 1.0, 1e-6);
  EXPECT_NEAR(s.x[y], 1.0, 1e-6);
  EXPECT_NEAR(s.objective, -1.0, 1e-8);
}

TEST(Nlp, MaximizeSenseMultiplierSign) {
  // max -(x-3)^2 s.t. 1 - x >= 0  ->  x = 1, L = f + m c: -2(x-3) - m = 0 -> m = 4
  NlpProblem p;
  VarId x = p.add_var("x");
  QuadExpr d = QuadExpr::var(x) - 3.0;
  p.set_objective(-(d * d), Sense::Maximize);
  p.add_geq(1.0 - QuadExpr::var(x));
  auto s = solve(p);
  ASSERT_EQ(s.status, NlpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-7);
  EXPECT_NEAR(s.multipliers[0], 4.0, 1e-6);
  EXPECT_LE(evaluate_kkt(p, s.x, s.multipliers).max(), 1e-6);
}

TEST(Nlp, FixedVariableAndLinearProgram) {
  // min x + 2y s.t. x + y >= 3, x <= 2, y fixed at 1.5
  NlpProblem p;
  VarId x = p.add_var("x", 0.0, 2.0);
  VarId y = p.add_var("y", 1.5, 1.5, 1.5);
  p.set_objective(QuadExpr::var(x) + 2.0 * QuadExpr::var(y), Sense::Minimize);
  p.add_geq(QuadExpr::var(x) + QuadExpr::var(y) - 3.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, NlpStatus::Optimal);
  EXPECT_NEAR(s.x[x], 1.5, 1e-7);
  EXPECT_NEAR(s.x[y], 1.5, 1e-9);
}

TEST(Nlp, InfeasibleProblemIsNotOptimal) {
  NlpProblem p;
  VarId x = p.add_var("x", 0.0, 1.0, 0.5);
  p.set_objective(QuadExpr::var(x), Sense::Minimize);
  p.add_eq(QuadExpr::var(x) - 5.0);
  auto s = solve(p);
  EXPECT_NE(s.status, NlpStatus::Optimal);
}

TEST(Nlp, DeterministicGivenIdenticalInputs) {
  NlpProblem p;
  VarId x = p.add_var("x", -1.0, 4.0, 0.0);
  VarId y = p.add_var("y", -1.0, 4.0, 0.0);
  QuadExpr dx = QuadExpr::var(x) - 1.0, dy = QuadExpr::var(y) - 2.5;
  p.set_objective(dx * dx + dy * dy + QuadExpr::var(x) * QuadExpr::var(y), Sense::Minimize);
  p.add_geq(4.0 - QuadExpr::var(x) * QuadExpr::var(x) - QuadExpr::var(y) * QuadExpr::var(y));
  auto a = solve(p), b = solve(p);
  ASSERT_EQ(a.status, NlpStatus::Optimal);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Nlp, DerivativeCheckOnRandomQuadratics) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  NlpProblem p;
  for (int k = 0; k < 5; ++k) p.add_var("v" + std::to_string(k));
  QuadExpr obj;
  for (int k = 0; k < 5; ++k) {
    obj.add_linear(k, U(rng));
    obj.add_quadratic(k, (k + 2) % 5, U(rng));
  }
  p.set_objective(obj, Sense::Minimize);
  QuadExpr c;
  c.add_quadratic(1, 1, 1.0).add_quadratic(0, 3, -2.0).add_linear(4, 0.5);
  p.add_geq(c, "c0");
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = U(rng);
    EXPECT_LE(check_derivatives(p, x).max_rel_error, 1e-6);
  }
}
