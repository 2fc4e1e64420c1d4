#include "dergame/distflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dergame {

FlowState FlowState::zeros(const Scenario& s) {
  const int K = s.times.size();
  const int n = s.network.num_nodes();
  const int L = s.network.num_lines();
  const std::size_t U = s.utility_units().size();
  FlowState st;
  st.root_p.assign(K, 0.0);
  st.root_q.assign(K, 0.0);
  st.gen_p.assign(U, std::vector<double>(K, 0.0));
  st.gen_q.assign(U, std::vector<double>(K, 0.0));
  st.der.assign(n, std::vector<double>(K, 0.0));
  st.flow_p.assign(L, std::vector<double>(K, 0.0));
  st.flow_q.assign(L, std::vector<double>(K, 0.0));
  st.voltage.assign(n, std::vector<double>(K, s.network.u_root));
  return st;
}

double BalanceResiduals::max_abs() const {
  double m = 0.0;
  for (const auto* grid : {&active, &reactive})
    for (const auto& row : *grid)
      for (double v : row) m = std::max(m, std::fabs(v));
  return m;
}

namespace {

void check_dims(const FlowState& st, const Scenario& s) {
  const std::size_t K = s.times.size();
  const auto& net = s.network;
  auto ok = [&](const std::vector<std::vector<double>>& g, std::size_t rows) {
    if (g.size() != rows) return false;
    for (const auto& r : g)
      if (r.size() != K) return false;
    return true;
  };
  if (st.root_p.size() != K || st.root_q.size() != K ||
      !ok(st.gen_p, s.utility_units().size()) || !ok(st.gen_q, s.utility_units().size()) ||
      !ok(st.der, net.num_nodes()) || !ok(st.flow_p, net.num_lines()) ||
      !ok(st.flow_q, net.num_lines()) || !ok(st.voltage, net.num_nodes()))
    throw std::invalid_argument("flow state dimensions do not match the scenario");
}

}  // namespace

BalanceResiduals balance_residuals(const FlowState& st, const Scenario& s,
                                   const std::vector<std::vector<double>>& demand_p,
                                   const std::vector<std::vector<double>>& demand_q) {
  check_dims(st, s);
  const auto& net = s.network;
  const int n = net.num_nodes();
  const int K = s.times.size();
  if (static_cast<int>(demand_p.size()) != n || static_cast<int>(demand_q.size()) != n)
    throw std::invalid_argument("demand grid does not match the network");
  BalanceResiduals r;
  r.active.assign(n, std::vector<double>(K, 0.0));
  r.reactive.assign(n, std::vector<double>(K, 0.0));
  const auto units = s.utility_units();
  for (int b = 0; b < n; ++b) {
    for (int k = 0; k < K; ++k) {
      double p = st.der[b][k] - demand_p[b][k], q = -demand_q[b][k];
      if (b == net.root_index()) {
        p += st.root_p[k];
        q += st.root_q[k];
      }
      for (std::size_t u = 0; u < units.size(); ++u)
        if (units[u]->node == net.nodes[b]) {
          p += st.gen_p[u][k];
          q += st.gen_q[u][k];
        }
      if (int l = net.line_into(b); l >= 0) {
        p += st.flow_p[l][k];
        q += st.flow_q[l][k];
      }
      for (int l : net.out_lines(b)) {
        p -= st.flow_p[l][k];
        q -= st.flow_q[l][k];
      }
      r.active[b][k] = p;
      r.reactive[b][k] = q;
    }
  }
  return r;
}

std::vector<std::vector<double>> voltage_residuals(const FlowState& st, const Network& net) {
  const std::size_t K = st.root_p.size();
  if (static_cast<int>(st.voltage.size()) != net.num_nodes() ||
      static_cast<int>(st.flow_p.size()) != net.num_lines())
    throw std::invalid_argument("flow state dimensions do not match the network");
  std::vector<std::vector<double>> r(net.num_nodes(), std::vector<double>(K, 0.0));
  for (int b = 0; b < net.num_nodes(); ++b) {
    const int l = net.line_into(b);
    for (std::size_t k = 0; k < K; ++k) {
      if (l < 0) {
        r[b][k] = st.voltage[b][k] - net.u_root;
        continue;
      }
      const Line& ln = net.lines[l];
      r[b][k] = st.voltage[b][k] - st.voltage[net.parent(b)][k] +
                2.0 * (ln.resistance * st.flow_p[l][k] + ln.reactance * st.flow_q[l][k]);
    }
  }
  return r;
}

std::vector<std::vector<double>> capacity_violation(const FlowState& st, const Network& net) {
  if (static_cast<int>(st.flow_p.size()) != net.num_lines())
    throw std::invalid_argument("flow state dimensions do not match the network");
  std::vector<std::vector<double>> v(st.flow_p.size());
  for (std::size_t l = 0; l < st.flow_p.size(); ++l)
    for (std::size_t k = 0; k < st.flow_p[l].size(); ++k)
      v[l].push_back(std::max(0.0, std::hypot(st.flow_p[l][k], st.flow_q[l][k]) - net.lines[l].s_max));
  return v;
}

Emissions emissions(const FlowState& st, const Scenario& s) {
  Emissions e;
  const auto& net = s.network;
  e.by_node.assign(net.num_nodes(), 0.0);
  const auto units = s.utility_units();
  if (st.gen_p.size() != units.size()) throw std::invalid_argument("generator count mismatch");
  for (std::size_t u = 0; u < units.size(); ++u) {
    const int b = net.index(units[u]->node);
    for (std::size_t k = 0; k < st.gen_p[u].size(); ++k)
      e.by_node[b] += units[u]->emission_factor * st.gen_p[u][k] * s.times.weight(static_cast<int>(k));
  }
  for (double x : e.by_node) e.total += x;
  for (std::size_t k = 0; k < st.root_p.size(); ++k)
    e.interface += s.econ.grid_emission_factor * st.root_p[k] * s.times.weight(static_cast<int>(k));
  return e;
}

const char* to_string(LlRow r) {
  switch (r) {
    case LlRow::BalanceP: return "balance_p";
    case LlRow::BalanceQ: return "balance_q";
    case LlRow::Voltage: return "voltage";
    case LlRow::VoltageLo: return "voltage_lo";
    case LlRow::VoltageHi: return "voltage_hi";
    case LlRow::GenLo: return "gen_lo";
    case LlRow::GenHi: return "gen_hi";
    case LlRow::GenQLo: return "gen_q_lo";
    case LlRow::GenQHi: return "gen_q_hi";
    case LlRow::ImportLo: return "import_lo";
    case LlRow::ImportHi: return "import_hi";
    case LlRow::DerLo: return "der_lo";
    case LlRow::DerAvail: return "der_avail";
    case LlRow::DerCap: return "der_cap";
    case LlRow::LineCapacity: return "line_capacity";
  }
  return "?";
}

LlModel build_ll(NlpProblem& host, const Scenario& s, const LlInputs& in) {
  const auto& net = s.network;
  const int n = net.num_nodes();
  const int L = net.num_lines();
  const int K = s.times.size();
  if (static_cast<int>(in.demand_p.size()) != n || static_cast<int>(in.demand_q.size()) != n ||
      static_cast<int>(in.pi_der.size()) != n || static_cast<int>(in.der_capacity.size()) != n)
    throw std::invalid_argument("lower-level inputs must cover every node");
  if (!in.dispatch_cap.empty() && static_cast<int>(in.dispatch_cap.size()) != n)
    throw std::invalid_argument("dispatch cap must cover every node");

  LlModel m;
  auto V = [](VarId v) { return QuadExpr::var(v); };
  auto add_primal = [&](const std::string& name, double scale, double start) {
    VarId v = host.add_var(name, -kInf, kInf, start);
    m.primals.push_back(v);
    m.primal_scale.push_back(scale);
    return v;
  };
  auto kk = [](int k) { return std::to_string(k); };

  for (int k = 0; k < K; ++k) {
    const double w = s.times.weight(k);
    m.root_p.push_back(add_primal("g_b0[" + kk(k) + "]", w, 0.0));
    m.root_q.push_back(add_primal("q_b0[" + kk(k) + "]", w, 0.0));
  }
  for (std::size_t g = 0; g < s.generators.size(); ++g) {
    const Generator& gen = s.generators[g];
    if (gen.owner != Owner::Utility) continue;
    m.units.push_back(static_cast<int>(g));
    std::vector<VarId> p, q;
    for (int k = 0; k < K; ++k) {
      const double w = s.times.weight(k);
      p.push_back(add_primal("g[" + gen.id + "," + kk(k) + "]", w, gen.p_min));
      q.push_back(add_primal("q[" + gen.id + "," + kk(k) + "]", w, 0.5 * (gen.q_min + gen.q_max)));
    }
    m.gen_p.push_back(p);
    m.gen_q.push_back(q);
  }
  m.der.assign(n, {});
  for (int b = 0; b < n; ++b) {
    const Generator* der = s.der_at(b);
    if (!der) continue;
    // No dispatch variable where nothing is available; g^D is then 0.
    for (int k = 0; k < K; ++k)
      m.der[b].push_back(der->capacity_factor * der->forecast[k] > 0.0
                             ? add_primal("gD[" + net.nodes[b] + "," + kk(k) + "]", s.times.weight(k), 0.0)
                             : -1);
  }
  m.flow_p.assign(L, {});
  m.flow_q.assign(L, {});
  for (int l = 0; l < L; ++l) {
    const std::string tag = net.lines[l].from + "-" + net.lines[l].to;
    for (int k = 0; k < K; ++k) {
      m.flow_p[l].push_back(add_primal("fp[" + tag + "," + kk(k) + "]", s.times.weight(k), 0.0));
      m.flow_q[l].push_back(add_primal("fq[" + tag + "," + kk(k) + "]", s.times.weight(k), 0.0));
    }
  }
  m.voltage.assign(n, std::vector<VarId>(K, -1));
  for (int b = 0; b < n; ++b) {
    if (b == net.root_index()) continue;
    for (int k = 0; k < K; ++k)
      m.voltage[b][k] = add_primal("u[" + net.nodes[b] + "," + kk(k) + "]", s.times.weight(k), net.u_root);
  }

  // Objective: energy purchases, utility generation (with carbon cost), DER payments.
  const auto& lmp = s.lmp();
  for (int k = 0; k < K; ++k) {
    const double w = s.times.weight(k);
    m.objective += (w * lmp[k]) * V(m.root_p[k]);
    for (std::size_t u = 0; u < m.units.size(); ++u) {
      const Generator& gen = s.generators[m.units[u]];
      m.objective += (w * (gen.cost + s.gamma() * gen.emission_factor)) * V(m.gen_p[u][k]);
    }
    for (int b = 0; b < n; ++b)
      if (!m.der[b].empty() && m.der[b][k] >= 0) m.objective += w * (in.pi_der[b][k] * V(m.der[b][k]));
  }

  auto add = [&](QuadExpr e, bool eq, LlRow fam, int idx, int k, std::string label) {
    m.constraints.push_back({std::move(e.compact()), eq, fam, idx, k, std::move(label)});
    return static_cast<int>(m.constraints.size()) - 1;
  };

  m.balance_p.assign(n, std::vector<int>(K));
  m.balance_q.assign(n, std::vector<int>(K));
  m.line_capacity.assign(L, std::vector<int>(K));
  for (int k = 0; k < K; ++k) {
    const double w = s.times.weight(k);
    const std::string at = "," + kk(k) + "]";
    for (int b = 0; b < n; ++b) {
      QuadExpr p = -in.demand_p[b][k], q = -in.demand_q[b][k];
      if (b == net.root_index()) {
        p += V(m.root_p[k]);
        q += V(m.root_q[k]);
      }
      for (std::size_t u = 0; u < m.units.size(); ++u)
        if (s.generators[m.units[u]].node == net.nodes[b]) {
          p += V(m.gen_p[u][k]);
          q += V(m.gen_q[u][k]);
        }
      if (!m.der[b].empty() && m.der[b][k] >= 0) p += V(m.der[b][k]);
      if (int l = net.line_into(b); l >= 0) {
        p += V(m.flow_p[l][k]);
        q += V(m.flow_q[l][k]);
      }
      for (int l : net.out_lines(b)) {
        p -= V(m.flow_p[l][k]);
        q -= V(m.flow_q[l][k]);
      }
      m.balance_p[b][k] = add(w * p, true, LlRow::BalanceP, b, k, "balance_p[" + net.nodes[b] + at);
      m.balance_q[b][k] = add(w * q, true, LlRow::BalanceQ, b, k, "balance_q[" + net.nodes[b] + at);
    }
    for (int b = 0; b < n; ++b) {
      const int l = net.line_into(b);
      if (l < 0) continue;
      const Line& ln = net.lines[l];
      const int par = net.parent(b);
      QuadExpr parent_u = par == net.root_index() ? QuadExpr(net.u_root) : V(m.voltage[par][k]);
      QuadExpr e = V(m.voltage[b][k]) - parent_u +
                   2.0 * (ln.resistance * V(m.flow_p[l][k]) + ln.reactance * V(m.flow_q[l][k]));
      add(w * e, true, LlRow::Voltage, b, k, "voltage[" + net.nodes[b] + at);
      add(w * (V(m.voltage[b][k]) - net.u_min), false, LlRow::VoltageLo, b, k, "u_lo[" + net.nodes[b] + at);
      add(w * (net.u_max - V(m.voltage[b][k])), false, LlRow::VoltageHi, b, k, "u_hi[" + net.nodes[b] + at);
    }
    for (std::size_t u = 0; u < m.units.size(); ++u) {
      const Generator& gen = s.generators[m.units[u]];
      const int ui = static_cast<int>(u);
      const std::string g = "[" + gen.id + at;
      add(w * (V(m.gen_p[u][k]) - gen.p_min), false, LlRow::GenLo, ui, k, "g_lo" + g);
      add(w * (gen.p_max - V(m.gen_p[u][k])), false, LlRow::GenHi, ui, k, "g_hi" + g);
      add(w * (V(m.gen_q[u][k]) - gen.q_min), false, LlRow::GenQLo, ui, k, "q_lo" + g);
      add(w * (gen.q_max - V(m.gen_q[u][k])), false, LlRow::GenQHi, ui, k, "q_hi" + g);
    }
    add(w * V(m.root_p[k]), false, LlRow::ImportLo, net.root_index(), k, "import_lo[" + kk(k) + "]");
    add(w * (net.interface_limit - V(m.root_p[k])), false, LlRow::ImportHi, net.root_index(), k,
        "import_hi[" + kk(k) + "]");
    for (int b = 0; b < n; ++b) {
      if (m.der[b].empty() || m.der[b][k] < 0) continue;
      const Generator& der = *s.der_at(b);
      const double avail = der.capacity_factor * der.forecast[k];
      add(w * V(m.der[b][k]), false, LlRow::DerLo, b, k, "der_lo[" + net.nodes[b] + at);
      add(w * (avail * in.der_capacity[b] - V(m.der[b][k])), false, LlRow::DerAvail, b, k,
          "der_avail[" + net.nodes[b] + at);
      if (!in.dispatch_cap.empty())
        add(w * (in.dispatch_cap[b] - V(m.der[b][k])), false, LlRow::DerCap, b, k,
            "der_cap[" + net.nodes[b] + at);
    }
    for (int l = 0; l < L; ++l) {
      const double smax = net.lines[l].s_max;
      const QuadExpr fp = V(m.flow_p[l][k]), fq = V(m.flow_q[l][k]);
      m.line_capacity[l][k] = add((w / (2.0 * smax)) * (QuadExpr(smax * smax) - fp * fp - fq * fq), false,
                                  LlRow::LineCapacity, l, k,
                                  "line_cap[" + net.lines[l].from + "-" + net.lines[l].to + at);
    }
  }
  return m;
}

FlowState LlModel::extract(const Scenario& s, const std::vector<double>& x) const {
  FlowState st = FlowState::zeros(s);
  const int K = s.times.size();
  for (int k = 0; k < K; ++k) {
    st.root_p[k] = x[root_p[k]];
    st.root_q[k] = x[root_q[k]];
  }
  for (std::size_t u = 0; u < gen_p.size(); ++u)
    for (int k = 0; k < K; ++k) {
      st.gen_p[u][k] = x[gen_p[u][k]];
      st.gen_q[u][k] = x[gen_q[u][k]];
    }
  for (std::size_t b = 0; b < der.size(); ++b)
    for (std::size_t k = 0; k < der[b].size(); ++k) st.der[b][k] = der[b][k] < 0 ? 0.0 : x[der[b][k]];
  for (std::size_t l = 0; l < flow_p.size(); ++l) {
    for (int k = 0; k < K; ++k) {
      st.flow_p[l][k] = x[flow_p[l][k]];
      st.flow_q[l][k] = x[flow_q[l][k]];
    }
  }
  for (std::size_t b = 0; b < voltage.size(); ++b)
    for (int k = 0; k < K; ++k)
      st.voltage[b][k] = voltage[b][k] < 0 ? s.network.u_root : x[voltage[b][k]];
  return st;
}

std::vector<std::vector<std::pair<int, double>>> LlModel::tau_bar_terms(const Scenario& s) const {
  const double hours = s.times.total_hours();
  std::vector<std::vector<std::pair<int, double>>> t(line_capacity.size());
  for (std::size_t l = 0; l < line_capacity.size(); ++l)
    for (std::size_t k = 0; k < line_capacity[l].size(); ++k)
      t[l].emplace_back(line_capacity[l][k], s.times.weight(static_cast<int>(k)) / hours);
  return t;
}

LlSolution solve_ll(const Scenario& s, const LlInputs& in, const std::vector<double>* warm,
                    const NlpSettings& settings) {
  NlpProblem p;
  LlSolution out;
  out.model = build_ll(p, s, in);
  const LlModel& m = out.model;
  std::vector<int> row_of;
  for (const auto& c : m.constraints)
    row_of.push_back(static_cast<int>(c.equality ? p.add_eq(c.expr, c.label) : p.add_geq(c.expr, c.label)));
  p.set_objective(m.objective, Sense::Minimize);
  if (warm && static_cast<int>(warm->size()) == p.num_vars()) p.start() = *warm;

  NlpSolution sol = solve(p, settings);
  out.status = sol.status;
  out.x = sol.x;
  out.cost = m.objective.value(out.x);
  out.state = m.extract(s, out.x);
  out.row_duals.assign(m.constraints.size(), 0.0);
  for (std::size_t j = 0; j < m.constraints.size(); ++j) {
    double y = sol.multipliers[row_of[j]];
    if (!m.constraints[j].equality) y = std::max(0.0, y);
    out.row_duals[j] = y;
  }
  for (const auto& terms : m.tau_bar_terms(s)) {
    double t = 0.0;
    for (auto [row, c] : terms) t += c * out.row_duals[row];
    out.tau_bar.push_back(t);
  }
  return out;
}

}  // namespace dergame
