#include "dergame/game.hpp"


#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dergame/aggregator.hpp"
#include "dergame/consumer.hpp"

namespace dergame {

namespace {

QuadExpr V(VarId v) { return QuadExpr::var(v); }

double normalizer(const Scenario& s) { return s.times.total_hours() * s.network.num_nodes(); }

QuadExpr der_capacity_expr(const KktBuild& build, int b) {
  return build.second_game ? QuadExpr(build.ul.g_available[b]) : V(build.ul.g_max[b]);
}

std::vector<double> weights(const Scenario& s) {
  std::vector<double> w(s.times.size());
  for (int k = 0; k < s.times.size(); ++k) w[k] = s.times.weight(k);
  return w;
}

}  // namespace

QuadExpr welfare_expression(const KktBuild& build, const Scenario& s) {
  const auto& ll = build.ll;
  const auto& ul = build.ul;
  const int n = s.network.num_nodes();
  const int K = s.times.size();
  const int R = s.times.days;
  const auto& lmp = s.lmp();
  const double N = s.demand.utility_n;
  const double gamma = s.gamma();
  const double net_cost = s.econ.carbon_env_cost - gamma;

  QuadExpr o(-s.econ.utility_capital * R);
  for (int k = 0; k < K; ++k) {
    const double w = s.times.weight(k);
    for (int b = 0; b < n; ++b) {
      const double M = s.demand.utility_m[b][k], D = s.demand.inflexible_p[b][k];
      const QuadExpr x = V(ul.demand[b][k]) + D;
      o += w * (M * x - (0.5 * N) * (x * x));
    }
    o -= (w * (lmp[k] + net_cost * s.econ.grid_emission_factor)) * V(ll.root_p[k]);
    for (std::size_t u = 0; u < ll.units.size(); ++u) {
      const Generator& g = s.generators[ll.units[u]];
      o -= (w * (g.cost + gamma * g.emission_factor + net_cost * g.emission_factor)) * V(ll.gen_p[u][k]);
    }
    for (int b = 0; b < n; ++b) {
      const Generator* der = s.der_at(b);
      if (!der) continue;
      const double a = der->capacity_factor * der->forecast[k];
      o += (w * (lmp[k] - der->cost) * a) * der_capacity_expr(build, b);
      if (ll.der[b][k] >= 0) o -= (w * lmp[k]) * V(ll.der[b][k]);
    }
  }
  for (int b = 0; b < n; ++b) {
    const Generator* der = s.der_at(b);
    if (!der) continue;
    const QuadExpr g = build.second_game ? QuadExpr(ul.g_fixed[b]) : V(ul.g_max[b]);
    o -= (der->invest_cost * R) * g;
  }
  return o.compact();
}

QuadExpr revenue_adequacy_expression(const KktBuild& build, const Scenario& s) {
  const auto& ll = build.ll;
  const auto& ul = build.ul;
  const auto& lmp = s.lmp();
  QuadExpr e(-(1.0 + s.econ.rate_of_return) * s.econ.utility_capital * s.times.days);
  for (int k = 0; k < s.times.size(); ++k) {
    const double w = s.times.weight(k);
    const QuadExpr pi = ul.tariff(s, k);
    for (int b = 0; b < s.network.num_nodes(); ++b)
      e += w * (pi * (V(ul.demand[b][k]) + s.demand.inflexible_p[b][k]));
    e -= (w * lmp[k]) * V(ll.root_p[k]);
    for (std::size_t u = 0; u < ll.units.size(); ++u)
      e -= (w * s.generators[ll.units[u]].cost) * V(ll.gen_p[u][k]);
  }
  return e.compact();
}

void assemble_mpec(KktBuild& build, const Scenario& s) {
  NlpProblem& nlp = build.mpec.nlp();
  const double scale = 1.0 / normalizer(s);
  nlp.set_objective(scale * welfare_expression(build, s), Sense::Maximize);
  nlp.add_eq(scale * revenue_adequacy_expression(build, s), "revenue_adequacy");
  const KktSystem& sys = build.kkt;
  for (const auto& c : sys.stationarity) nlp.add_eq(c.expr, c.label);
  for (const auto& c : sys.equalities) nlp.add_eq(c.expr, c.label);
  for (const auto& c : sys.policy) nlp.add_eq(c.expr, c.label);
  for (const auto& p : sys.pairs) build.mpec.add_pair(p.lhs, p.rhs, p.label);
  build.mpec.validate();
}

namespace {

// Tariff revenue at level L (off-peak L, peak ratio * L) with demand response.
double tariff_revenue(const Scenario& s, double L, double ratio) {
  double rev = 0.0;
  for (int k = 0; k < s.times.size(); ++k) {
    const double pi = s.times.is_peak(k) ? ratio * L : L;
    for (int b = 0; b < s.network.num_nodes(); ++b)
      rev += s.times.weight(k) * pi *
             (flexible_demand(s.demand.utility_m[b][k], s.demand.utility_n, pi) + s.demand.inflexible_p[b][k]);
  }
  return rev;
}

// Smallest level whose revenue covers `cost`; the revenue-maximizing level if
// none does.
double adequate_level(const Scenario& s, double cost, double ratio, double max_price) {
  const double hi_level = max_price / ratio;
  double best = 0.0, best_rev = -kInf;
  const int grid = 400;
  for (int i = 0; i <= grid; ++i) {
    const double L = hi_level * i / grid;
    const double r = tariff_revenue(s, L, ratio);
    if (r >= cost) {
      double lo = hi_level * std::max(0, i - 1) / grid, hi = L;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tariff_revenue(s, mid, ratio) >= cost ? hi : lo) = mid;
      }
      return hi;
    }
    if (r > best_rev) {
      best_rev = r;
      best = L;
    }
  }
  return best;
}

}  // namespace

FixedPoint fixed_point_start(const KktBuild& build, const Scenario& s, double peak_ratio, int max_iter) {
  const auto& ul = build.ul;
  const auto& view = build.view;
  const int n = s.network.num_nodes();
  const int K = s.times.size();
  const int R = s.times.days;
  const auto& lmp = s.lmp();
  const auto w = weights(s);
  const auto units = s.utility_units();

  double max_price = 0.0;
  for (const auto& row : s.demand.utility_m)
    for (double m : row) max_price = std::max(max_price, m);

  std::vector<std::vector<double>> pi_der(n, std::vector<double>(K, 0.0));
  for (int b = 0; b < n; ++b)
    if (s.der_at(b))
      for (int k = 0; k < K; ++k)
        pi_der[b][k] = s.policy == Policy::VS ? lmp[k] + s.econ.carbon_env_cost * s.econ.marginal_emission[k]
                                              : lmp[k];
  std::vector<double> g(n, 0.0);
  if (build.second_game) g = ul.g_fixed;

  auto size_capacity = [&] {
    if (build.second_game) return;
    for (int b = 0; b < n; ++b) {
      const Generator* der = s.der_at(b);
      if (!der) continue;
      g[b] = capped_gmax(der->invest_cost * R, der->capacity_factor, der->forecast, pi_der[b], der->cost,
                         view.hosting[b], w)
                 .g_max;
    }
  };

  double level = adequate_level(s, (1.0 + s.econ.rate_of_return) * s.econ.utility_capital * R, peak_ratio,
                                max_price);
  std::vector<double> tariff(K), warm;
  std::vector<std::vector<double>> d(n, std::vector<double>(K));
  LlSolution sol;
  NlpSettings nlp;
  nlp.tol = s.solver.nlp_tol;
  nlp.max_iter = s.solver.max_iter;

  FixedPoint fp;
  if (s.policy == Policy::NEM)
    for (int b = 0; b < n; ++b)
      if (s.der_at(b))
        for (int k = 0; k < K; ++k) pi_der[b][k] = s.times.is_peak(k) ? peak_ratio * level : level;
  size_capacity();
  // Values the last lower-level solve was built from; the point uses these so
  // that it is consistent with that solve even before convergence.
  std::vector<std::vector<double>> pi_used;
  std::vector<double> g_used;
  double level_used = level;
  for (fp.iterations = 1; fp.iterations <= max_iter; ++fp.iterations) {
    pi_used = pi_der;
    g_used = g;
    level_used = level;
    for (int k = 0; k < K; ++k) tariff[k] = s.times.is_peak(k) ? peak_ratio * level : level;
    LlInputs in;
    in.demand_p.assign(n, std::vector<QuadExpr>(K));
    in.demand_q.assign(n, std::vector<QuadExpr>(K));
    in.pi_der.assign(n, std::vector<QuadExpr>(K));
    in.der_capacity.assign(n, QuadExpr(0.0));
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < K; ++k) {
        d[b][k] = flexible_demand(s.demand.utility_m[b][k], s.demand.utility_n, tariff[k]);
        const double p = view.demand.active(d[b][k] + s.demand.inflexible_p[b][k]);
        in.demand_p[b][k] = p;
        in.demand_q[b][k] = view.demand.phi ? *view.demand.phi * p : view.demand.alpha * s.demand.inflexible_q[b][k];
        in.pi_der[b][k] = pi_der[b][k];
      }
      in.der_capacity[b] = build.second_game ? ul.g_available[b] : g[b];
    }
    if (build.second_game) in.dispatch_cap = ul.g_fixed;
    sol = solve_ll(s, in, warm.empty() ? nullptr : &warm, nlp);
    if (!converged(sol.status))
      throw GameError(std::string("lower level at the warm start: ") + to_string(sol.status), {});
    warm = sol.x;

    // Compensation implied by this dispatch, damped.
    double change = 0.0;
    for (int b = 0; b < n; ++b) {
      if (!s.der_at(b)) continue;
      for (int k = 0; k < K; ++k) {
        double target = tariff[k];
        if (s.policy == Policy::VS) {
          target = lmp[k] + s.econ.carbon_env_cost * s.econ.marginal_emission[k];
          if (int l = s.network.line_into(b); l >= 0) target += sol.tau_bar[l];
        } else if (s.policy == Policy::DLMP) {
          target = sol.row_duals[sol.model.balance_p[b][k]];
        }
        change = std::max(change, std::fabs(target - pi_der[b][k]));
        pi_der[b][k] = s.policy == Policy::NEM ? target : 0.5 * (pi_der[b][k] + target);
      }
    }
    const std::vector<double> g_prev = g;
    size_capacity();
    for (int b = 0; b < n; ++b) change = std::max(change, std::fabs(g[b] - g_prev[b]));

    double cost = (1.0 + s.econ.rate_of_return) * s.econ.utility_capital * R;
    for (int k = 0; k < K; ++k) {
      cost += w[k] * lmp[k] * sol.state.root_p[k];
      for (std::size_t u = 0; u < units.size(); ++u) cost += w[k] * units[u]->cost * sol.state.gen_p[u][k];
    }
    // Demand falls as the tariff rises, so the undamped update oscillates.
    const double next = adequate_level(s, cost, peak_ratio, max_price);
    change = std::max(change, std::fabs(next - level));
    level += 0.5 * (next - level);
    if (s.policy == Policy::NEM) {
      for (int b = 0; b < n; ++b)
        if (s.der_at(b))
          for (int k = 0; k < K; ++k) pi_der[b][k] = s.times.is_peak(k) ? peak_ratio * level : level;
      size_capacity();
    }
    if (change < 1e-9) break;
  }
  fp.iterations = std::min(fp.iterations, max_iter);

  // Lay the final iterate out over the MPEC variables.
  const NlpProblem& host = build.mpec.nlp();
  fp.point = host.start();
  for (int r = 0; r < R; ++r) {
    fp.point[ul.tariff_peak[r]] = peak_ratio * level_used;
    fp.point[ul.tariff_offpeak[r]] = level_used;
  }
  for (int b = 0; b < n; ++b) {
    for (int k = 0; k < K; ++k) {
      fp.point[ul.demand[b][k]] = d[b][k];
      if (!ul.pi_der[b].empty()) fp.point[ul.pi_der[b][k]] = pi_used[b][k];
    }
    if (!build.second_game && ul.g_max[b] >= 0) fp.point[ul.g_max[b]] = g_used[b];
  }
  for (std::size_t p = 0; p < build.ll.primals.size(); ++p)
    fp.point[build.ll.primals[p]] = sol.x[sol.model.primals[p]];
  for (std::size_t j = 0; j < build.kkt.row_dual.size(); ++j) fp.point[build.kkt.row_dual[j]] = sol.row_duals[j];
  // Clip into the variable bounds (duals at their sign boundary, demand caps).
  for (std::size_t i = 0; i < fp.point.size(); ++i)
    fp.point[i] = std::clamp(fp.point[i], host.lower()[i], host.upper()[i]);
  fp.residual = kkt_residual(build.kkt, fp.point).max();
  return fp;
}

namespace {

RelaxationSchedule schedule_for(const Scenario& s) {
  RelaxationSchedule r;
  r.rho0 = s.solver.rho0;
  r.shrink = s.solver.shrink;
  r.rho_min = s.solver.rho_min;
  r.accept_residual = s.solver.accept_residual;
  r.stage.tol = s.solver.nlp_tol;
  r.stage.max_iter = s.solver.max_iter;
  return r;
}

constexpr double kPeakRatios[] = {1.0, 1.4, 1.8};

MpecResult solve_game(KktBuild& build, const Scenario& s, GameDiagnostics& diag, const char* name) {
  const auto t0 = std::chrono::steady_clock::now();
  assemble_mpec(build, s);
  std::vector<std::vector<double>> starts;
  std::string warm_errors;
  for (double ratio : kPeakRatios) {
    try {
      starts.push_back(fixed_point_start(build, s, ratio).point);
    } catch (const GameError& e) {
      warm_errors += std::string(e.what()) + "; ";
    }
  }
  if (starts.empty()) throw GameError(std::string(name) + ": no starting point (" + warm_errors + ")", {});
  try {
    MpecResult res = scholtes_solve(build.mpec, schedule_for(s), starts);
    diag.trace = res.trace;
    diag.complementarity = res.complementarity;
    diag.kkt = kkt_residual(build.kkt, res.solution.x);
    diag.start = res.trace.empty() ? -1 : res.trace.front().start;
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  } catch (const MpecError& e) {
    throw GameError(std::string(name) + ": " + e.what(), e.trace);
  }
}

std::vector<double> tariff_values(const KktBuild& build, const Scenario& s, const std::vector<double>& x) {
  std::vector<double> t(s.times.size());
  for (int k = 0; k < s.times.size(); ++k) t[k] = build.ul.tariff(s, k).value(x);
  return t;
}

std::vector<std::vector<double>> pi_der_values(const KktBuild& build, const Scenario& s,
                                               const std::vector<double>& x) {
  const int n = s.network.num_nodes();
  std::vector<std::vector<double>> p(n, std::vector<double>(s.times.size(), 0.0));
  for (int b = 0; b < n; ++b)
    for (std::size_t k = 0; k < build.ul.pi_der[b].size(); ++k) p[b][k] = x[build.ul.pi_der[b][k]];
  return p;
}

}  // namespace

Slsf1Solution solve_slsf1(const Scenario& s) {
  KktBuild build = build_ll_kkt(s);
  Slsf1Solution out;
  const MpecResult res = solve_game(build, s, out.diag, "first game");
  const auto& x = res.solution.x;
  const int n = s.network.num_nodes();
  out.g_max.assign(n, 0.0);
  out.capped.assign(n, false);
  out.nonpositive_denominator.assign(n, false);
  out.tariff = tariff_values(build, s, x);
  out.pi_der = pi_der_values(build, s, x);
  const auto w = weights(s);
  for (int b = 0; b < n; ++b) {
    const Generator* der = s.der_at(b);
    if (!der) continue;
    out.g_max[b] = std::max(0.0, x[build.ul.g_max[b]]);
    const CappedCapacity c = capped_gmax(der->invest_cost * s.times.days, der->capacity_factor, der->forecast,
                                         out.pi_der[b], der->cost, build.view.hosting[b], w);
    out.capped[b] = c.capped;
    out.nonpositive_denominator[b] = c.nonpositive_denominator;
  }
  out.objective = res.solution.objective * normalizer(s);
  return out;
}

Slsf2Solution solve_slsf2(const Scenario& s, const std::vector<double>& g_max_star) {
  KktBuild build = build_slsf2_kkt(s, g_max_star);
  Slsf2Solution out;
  const MpecResult res = solve_game(build, s, out.diag, "second game");
  const auto& x = res.solution.x;
  const int n = s.network.num_nodes();
  const int K = s.times.size();
  MarketPoint& pt = out.point;
  pt.tariff = tariff_values(build, s, x);
  pt.demand.assign(n, std::vector<double>(K));
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < K; ++k) pt.demand[b][k] = x[build.ul.demand[b][k]];
  pt.flow = build.ll.extract(s, x);
  pt.g_max = g_max_star;
  pt.g_available = build.ul.g_available;
  pt.pi_der = pi_der_values(build, s, x);

  out.dlmp.assign(n, std::vector<double>(K));
  out.cap_dual.assign(n, std::vector<double>(K, 0.0));
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < K; ++k) out.dlmp[b][k] = x[build.kkt.row_dual[build.ll.balance_p[b][k]]];
  for (const auto& terms : build.ll.tau_bar_terms(s)) {
    double t = 0.0;
    for (auto [row, c] : terms) t += c * x[build.kkt.row_dual[row]];
    out.tau_bar.push_back(t);
  }
  for (std::size_t j = 0; j < build.ll.constraints.size(); ++j) {
    const auto& c = build.ll.constraints[j];
    if (c.family == LlRow::DerCap) out.cap_dual[c.index][c.k] = x[build.kkt.row_dual[j]];
  }
  out.stranded.assign(n, 0.0);
  for (int b = 0; b < n; ++b) out.stranded[b] = g_max_star[b] - build.ul.g_available[b];
  out.objective = res.solution.objective * normalizer(s);
  return out;
}

GameOutcome run_case(const Scenario& s) {
  GameOutcome out;
  out.scenario_id = s.id;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    s.validate();
    out.slsf1 = solve_slsf1(s);
    for (int b = 0; b < s.network.num_nodes(); ++b) {
      if (out.slsf1->nonpositive_denominator[b])
        out.diagnostics.push_back("sizing margin reaches the investment cost at node " + s.network.nodes[b] +
                                  "; capacity set by the hosting bound");
      else if (out.slsf1->capped[b])
        out.diagnostics.push_back("capacity capped at the hosting bound at node " + s.network.nodes[b]);
    }
    out.slsf2 = solve_slsf2(s, out.slsf1->g_max);
    for (int b = 0; b < s.network.num_nodes(); ++b)
      if (out.slsf2->stranded[b] > 0.0) {
        std::ostringstream os;
        os << "stranded capacity " << out.slsf2->stranded[b] << " MW at node " << s.network.nodes[b];
        out.diagnostics.push_back(os.str());
      }
    out.welfare = objective(out.slsf2->point, s);
  } catch (const std::exception& e) {
    out.error = e.what();
    out.diagnostics.push_back(std::string("failed: ") + e.what());
  }
  out.seconds = elapsed();
  return out;
}

}  // namespace dergame
