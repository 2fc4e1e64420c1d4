#include "dergame/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dergame/aggregator.hpp"

namespace dergame {

namespace {

QuadExpr V(VarId v) { return QuadExpr::var(v); }

// Duration weight a row was multiplied by.
double row_scale(const Scenario& s, const LlConstraint& c) { return s.times.weight(c.k); }

// Adds sigma * mult * d(e)/dx_p to the stationarity row of every primal p in
// e. mult < 0 stands for the constant 1 (objective terms).
void accumulate(std::vector<QuadExpr>& rows, const std::vector<int>& pos, const QuadExpr& e,
                double sigma, VarId mult) {
  auto at = [&](VarId v) { return v < static_cast<VarId>(pos.size()) ? pos[v] : -1; };
  for (const auto& t : e.linear()) {
    const int r = at(t.var);
    if (r < 0) continue;
    if (mult < 0) rows[r].add_constant(sigma * t.coef);
    else rows[r].add_linear(mult, sigma * t.coef);
  }
  auto term = [&](int r, VarId other, double coef) {
    if (mult < 0) rows[r].add_linear(other, coef);
    else rows[r].add_quadratic(mult, other, coef);
  };
  for (const auto& t : e.quadratic()) {
    if (t.i == t.j) {
      if (int r = at(t.i); r >= 0) term(r, t.i, 2.0 * sigma * t.coef);
      continue;
    }
    if (int r = at(t.i); r >= 0) term(r, t.j, sigma * t.coef);
    if (int r = at(t.j); r >= 0) term(r, t.i, sigma * t.coef);
  }
}

}  // namespace

double KktResidualReport::max() const { return std::max({stationarity, complementarity, feasibility}); }

KktSystem build_kkt(NlpProblem& host, const LlModel& ll, const Scenario& s) {
  KktSystem sys;
  std::vector<int> pos(host.num_vars(), -1);
  for (std::size_t p = 0; p < ll.primals.size(); ++p) pos[ll.primals[p]] = static_cast<int>(p);

  for (const auto& c : ll.constraints)
    sys.row_dual.push_back(host.add_var("y:" + c.label, c.equality ? -kInf : 0.0, kInf, c.equality ? 0.0 : 1.0));

  std::vector<QuadExpr> rows(ll.primals.size());
  accumulate(rows, pos, ll.objective, 1.0, -1);
  for (std::size_t j = 0; j < ll.constraints.size(); ++j)
    accumulate(rows, pos, ll.constraints[j].expr, -1.0, sys.row_dual[j]);
  for (std::size_t p = 0; p < rows.size(); ++p) {
    rows[p] *= 1.0 / ll.primal_scale[p];
    rows[p].compact();
    sys.stationarity.push_back({std::move(rows[p]), ConstraintKind::Equal,
                                "stat:" + host.names()[ll.primals[p]]});
    sys.stationarity_var.push_back(ll.primals[p]);
  }

  for (std::size_t j = 0; j < ll.constraints.size(); ++j) {
    const auto& c = ll.constraints[j];
    QuadExpr e = (1.0 / row_scale(s, c)) * c.expr;
    e.compact();
    if (c.equality) sys.equalities.push_back({std::move(e), ConstraintKind::Equal, c.label});
    else sys.pairs.push_back({std::move(e), V(sys.row_dual[j]), c.label});
  }
  sys.ll_pairs = static_cast<int>(sys.pairs.size());
  return sys;
}

QuadExpr GameLayout::tariff(const Scenario& s, int k) const {
  const int r = s.times.day(k);
  return V(s.times.is_peak(k) ? tariff_peak[r] : tariff_offpeak[r]);
}

QuadExpr GameLayout::capacity(int b) const {
  if (!g_max.empty() && g_max[b] >= 0) return V(g_max[b]);
  return g_fixed.empty() ? QuadExpr(0.0) : QuadExpr(g_fixed[b]);
}

namespace {

KktBuild build_game(const Scenario& s, const std::vector<double>* g_star) {
  s.validate();
  KktBuild out;
  out.second_game = g_star != nullptr;
  out.view = out.second_game ? true_view(s) : lower_level_view(s);
  const auto& net = s.network;
  const int n = net.num_nodes();
  const int K = s.times.size();
  const int R = s.times.days;
  NlpProblem& host = out.mpec.nlp();
  GameLayout& ul = out.ul;
  const double N = s.demand.utility_n;

  double m_max = 0.0;
  for (const auto& row : s.demand.utility_m)
    for (double m : row) m_max = std::max(m_max, m);
  for (int r = 0; r < R; ++r) {
    ul.tariff_peak.push_back(host.add_var("pi_peak[" + std::to_string(r) + "]", 0.0, m_max, 0.5 * m_max));
    ul.tariff_offpeak.push_back(host.add_var("pi_off[" + std::to_string(r) + "]", 0.0, m_max, 0.5 * m_max));
  }
  ul.demand.assign(n, {});
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < K; ++k) {
      const double cap = std::max(0.0, s.demand.utility_m[b][k] / N);
      ul.demand[b].push_back(host.add_var("d[" + net.nodes[b] + "," + std::to_string(k) + "]", 0.0, cap,
                                          0.5 * cap));
    }
  ul.pi_der.assign(n, {});
  ul.g_max.assign(n, -1);
  for (int b = 0; b < n; ++b) {
    if (!s.der_at(b)) continue;
    for (int k = 0; k < K; ++k)
      ul.pi_der[b].push_back(host.add_var("piD[" + net.nodes[b] + "," + std::to_string(k) + "]", -kInf, kInf,
                                          s.lmp()[k]));
    if (!out.second_game)
      ul.g_max[b] = host.add_var("gmax[" + net.nodes[b] + "]", 0.0, out.view.hosting[b], 0.5 * out.view.hosting[b]);
  }
  if (out.second_game) {
    if (static_cast<int>(g_star->size()) != n) throw std::invalid_argument("capacity must cover every node");
    ul.g_fixed = *g_star;
    ul.g_available.assign(n, 0.0);
    for (int b = 0; b < n; ++b) {
      if ((*g_star)[b] < 0.0) throw std::invalid_argument("capacity must be nonnegative");
      ul.g_available[b] = std::min((*g_star)[b], s.econ.hosting[b]);
    }
  }

  LlInputs in;
  in.demand_p.assign(n, std::vector<QuadExpr>(K));
  in.demand_q.assign(n, std::vector<QuadExpr>(K));
  in.pi_der.assign(n, std::vector<QuadExpr>(K));
  in.der_capacity.assign(n, QuadExpr(0.0));
  const DemandBelief& db = out.view.demand;
  for (int b = 0; b < n; ++b) {
    for (int k = 0; k < K; ++k) {
      QuadExpr p = db.alpha * (V(ul.demand[b][k]) + s.demand.inflexible_p[b][k]);
      in.demand_q[b][k] = db.phi ? *db.phi * p : QuadExpr(db.alpha * s.demand.inflexible_q[b][k]);
      in.demand_p[b][k] = std::move(p);
      if (!ul.pi_der[b].empty()) in.pi_der[b][k] = V(ul.pi_der[b][k]);
    }
    if (s.der_at(b))
      in.der_capacity[b] = out.second_game ? QuadExpr(ul.g_available[b]) : ul.capacity(b);
  }
  // Capacity beyond the true hosting bound is stranded: availability uses
  // min(g*, H) while the pair g* - g^D _|_ phi keeps its stated form.
  if (out.second_game) in.dispatch_cap = ul.g_fixed;

  out.ll = build_ll(host, s, in);
  out.kkt = build_kkt(host, out.ll, s);
  KktSystem& sys = out.kkt;

  // Consumers: d >= 0 _|_ N d - M + pi >= 0 (true preferences).
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < K; ++k) {
      QuadExpr slack = N * V(ul.demand[b][k]) - s.demand.utility_m[b][k] + ul.tariff(s, k);
      sys.pairs.push_back({V(ul.demand[b][k]), std::move(slack.compact()),
                           "consumer[" + net.nodes[b] + "," + std::to_string(k) + "]"});
    }

  // Aggregator sizing, normalized by the horizon investment cost:
  // 1 - kbar g (1 - margin / C_inv) >= 0 _|_ h - g >= 0.
  if (!out.second_game) {
    for (int b = 0; b < n; ++b) {
      const Generator* der = s.der_at(b);
      if (!der) continue;
      const double c_inv = der->invest_cost * R;
      const double kbar = mean_availability(der->capacity_factor, der->forecast);
      QuadExpr margin;
      for (int k = 0; k < K; ++k) {
        const double a = s.times.weight(k) * der->capacity_factor * der->forecast[k] / c_inv;
        margin += a * (V(ul.pi_der[b][k]) - der->cost);
      }
      QuadExpr lhs = 1.0 - kbar * (V(ul.g_max[b]) * (1.0 - margin));
      sys.pairs.push_back({std::move(lhs.compact()), out.view.hosting[b] - V(ul.g_max[b]),
                           "sizing[" + net.nodes[b] + "]"});
    }
  }

  // Compensation rule.
  const auto& lmp = s.lmp();
  const auto tau_bar = out.ll.tau_bar_terms(s);
  for (int b = 0; b < n; ++b) {
    if (ul.pi_der[b].empty()) continue;
    for (int k = 0; k < K; ++k) {
      QuadExpr price;
      switch (s.policy) {
        case Policy::NEM:
          price = ul.tariff(s, k);
          break;
        case Policy::VS: {
          price = QuadExpr(lmp[k] + s.econ.carbon_env_cost * s.econ.marginal_emission[k]);
          if (int l = net.line_into(b); l >= 0)
            for (auto [row, c] : tau_bar[l]) price += c * V(sys.row_dual[row]);
          break;
        }
        case Policy::DLMP:
          price = V(sys.row_dual[out.ll.balance_p[b][k]]);
          break;
      }
      QuadExpr row = V(ul.pi_der[b][k]) - price;
      sys.policy.push_back({std::move(row.compact()), ConstraintKind::Equal,
                            "policy[" + net.nodes[b] + "," + std::to_string(k) + "]"});
    }
  }
  return out;
}

}  // namespace

KktBuild build_ll_kkt(const Scenario& s) { return build_game(s, nullptr); }

KktBuild build_slsf2_kkt(const Scenario& s, const std::vector<double>& g_max_star) {
  return build_game(s, &g_max_star);
}

KktResidualReport kkt_residual(const KktSystem& sys, const std::vector<double>& x) {
  KktResidualReport r;
  for (const auto& c : sys.stationarity) r.stationarity = std::max(r.stationarity, std::fabs(c.expr.value(x)));
  for (const auto& c : sys.equalities) r.feasibility = std::max(r.feasibility, std::fabs(c.expr.value(x)));
  for (const auto& c : sys.policy) r.feasibility = std::max(r.feasibility, std::fabs(c.expr.value(x)));
  for (const auto& p : sys.pairs) {
    const double a = p.lhs.value(x), b = p.rhs.value(x);
    r.complementarity = std::max(r.complementarity, std::fabs(std::min(a, b)));
    r.feasibility = std::max({r.feasibility, -a, -b});
  }
  return r;
}

std::string dump(const KktSystem& sys, const NlpProblem& host) {
  std::ostringstream os;
  const auto* names = &host.names();
  for (const auto& c : sys.stationarity) os << c.label << ": " << c.expr.to_string(names) << " = 0\n";
  for (const auto& c : sys.equalities) os << c.label << ": " << c.expr.to_string(names) << " = 0\n";
  for (const auto& c : sys.policy) os << c.label << ": " << c.expr.to_string(names) << " = 0\n";
  for (const auto& p : sys.pairs)
    os << p.label << ": 0 <= " << p.lhs.to_string(names) << " _|_ " << p.rhs.to_string(names) << " >= 0\n";
  return os.str();
}

}  // namespace dergame
