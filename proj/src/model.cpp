#include "dergame/model.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dergame {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void Network::finalize() {
  const int n = num_nodes();
  require(n > 0, "network has no nodes");
  std::set<std::string> seen(nodes.begin(), nodes.end());
  require(static_cast<int>(seen.size()) == n, "duplicate node id");
  root_ = -1;
  for (int b = 0; b < n; ++b)
    if (nodes[b] == root) root_ = b;
  require(root_ >= 0, "root '" + root + "' is not a node");
  require(interface_limit > 0.0, "interface_limit must be positive");
  require(u_min > 0.0 && u_min <= u_root && u_root <= u_max, "voltage bounds must bracket u_root");

  parent_.assign(n, -1);
  line_into_.assign(n, -1);
  out_lines_.assign(n, {});
  from_.assign(lines.size(), -1);
  to_.assign(lines.size(), -1);
  for (int l = 0; l < num_lines(); ++l) {
    const Line& ln = lines[l];
    require(ln.resistance >= 0.0, "line " + ln.from + "-" + ln.to + ": resistance must be >= 0");
    require(ln.reactance >= 0.0, "line " + ln.from + "-" + ln.to + ": reactance must be >= 0");
    require(ln.s_max > 0.0, "line " + ln.from + "-" + ln.to + ": s_max must be positive");
    from_[l] = index(ln.from);
    to_[l] = index(ln.to);
    require(from_[l] != to_[l], "line " + ln.from + "-" + ln.to + " is a self loop");
    // A second ancestor or an edge into the root means a cycle or a non-tree.
    require(to_[l] != root_ && line_into_[to_[l]] < 0, "network is not radial");
    line_into_[to_[l]] = l;
    parent_[to_[l]] = from_[l];
    out_lines_[from_[l]].push_back(l);
  }
  require(num_lines() == n - 1, "network is not radial");
  order_.clear();
  order_.push_back(root_);
  for (std::size_t k = 0; k < order_.size(); ++k)
    for (int l : out_lines_[order_[k]]) order_.push_back(to_[l]);
  require(static_cast<int>(order_.size()) == n, "network is not radial");
}

int Network::index(const std::string& node) const {
  auto it = std::find(nodes.begin(), nodes.end(), node);
  if (it == nodes.end()) throw ValidationError("unknown node '" + node + "'");
  return static_cast<int>(it - nodes.begin());
}

bool TimeStructure::is_peak(int k) const {
  return std::find(peak.begin(), peak.end(), interval(k)) != peak.end();
}

double TimeStructure::total_hours() const {
  double h = 0.0;
  for (double d : duration) h += d;
  return h * days;
}

namespace {

const char* const kPolicy[] = {"nem", "vs", "dlmp"};
const char* const kCase[] = {"complete", "hosting", "consumer", "both"};
const char* const kStance[] = {"na", "optimistic", "pessimistic"};

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const char* const (&names)[N], const char* what) {
  std::string low = s;
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  for (std::size_t k = 0; k < N; ++k)
    if (low == names[k]) return static_cast<E>(k);
  throw ValidationError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

const char* to_string(Policy p) { return kPolicy[static_cast<int>(p)]; }
const char* to_string(InfoCase c) { return kCase[static_cast<int>(c)]; }
const char* to_string(Stance s) { return kStance[static_cast<int>(s)]; }
Policy parse_policy(const std::string& s) { return parse_enum<Policy>(s, kPolicy, "policy"); }
InfoCase parse_case(const std::string& s) { return parse_enum<InfoCase>(s, kCase, "case"); }
Stance parse_stance(const std::string& s) { return parse_enum<Stance>(s, kStance, "stance"); }
int case_number(InfoCase c) { return static_cast<int>(c) + 1; }

const Generator* Scenario::der_at(int b) const {
  for (const auto& g : generators)
    if (g.owner == Owner::Aggregator && g.node == network.nodes[b]) return &g;
  return nullptr;
}

std::vector<const Generator*> Scenario::utility_units() const {
  std::vector<const Generator*> out;
  for (const auto& g : generators)
    if (g.owner == Owner::Utility) out.push_back(&g);
  return out;
}

void Scenario::validate() const {
  Network net = network;
  net.finalize();
  const int n = net.num_nodes();
  const int K = times.size();

  require(times.intervals > 0 && times.days > 0, "time structure must be nonempty");
  require(static_cast<int>(times.duration.size()) == times.intervals,
          "duration must list every interval");
  for (double d : times.duration) require(d > 0.0 && finite(d), "interval duration must be positive");
  std::set<int> peak(times.peak.begin(), times.peak.end());
  require(peak.size() == times.peak.size(), "peak intervals repeated");
  for (int t : peak) require(t >= 0 && t < times.intervals, "peak interval out of range");
  require(!peak.empty(), "peak block must be nonempty");
  require(static_cast<int>(peak.size()) < times.intervals, "off-peak block must be nonempty");

  std::set<std::string> ids;
  std::set<int> der_nodes;
  for (const auto& g : generators) {
    const std::string tag = "generator " + g.id + ": ";
    require(ids.insert(g.id).second, tag + "duplicate id");
    int b = net.index(g.node);
    require(g.p_min <= g.p_max, tag + "p_min must not exceed p_max");
    require(g.q_min <= g.q_max, tag + "q_min must not exceed q_max");
    require(g.emission_factor >= 0.0, tag + "emission_factor must be >= 0");
    require(finite(g.cost), tag + "cost must be finite");
    if (g.owner == Owner::Aggregator) {
      require(der_nodes.insert(b).second, tag + "one aggregator unit per node");
      require(g.invest_cost > 0.0, tag + "invest_cost must be positive");
      require(g.capacity_factor >= 0.0 && g.capacity_factor <= 1.0,
              tag + "capacity_factor must lie in [0, 1]");
      require(static_cast<int>(g.forecast.size()) == K, tag + "forecast length must match time grid");
      for (double f : g.forecast) require(f >= 0.0 && f <= 1.0, tag + "forecast factors must lie in [0, 1]");
    }
  }

  auto grid = [&](const std::vector<std::vector<double>>& v, const char* name) {
    require(static_cast<int>(v.size()) == n, std::string(name) + " must cover every node");
    for (const auto& row : v) {
      require(static_cast<int>(row.size()) == K, std::string(name) + " length must match time grid");
      for (double x : row) require(finite(x), std::string(name) + " must be finite");
    }
  };
  grid(demand.inflexible_p, "inflexible_p");
  grid(demand.inflexible_q, "inflexible_q");
  grid(demand.utility_m, "M");
  require(demand.utility_n > 0.0 && finite(demand.utility_n), "N must be positive");
  for (const auto& row : demand.inflexible_p)
    for (double x : row) require(x >= 0.0, "inflexible_p must be >= 0");
  for (const auto& row : demand.utility_m)
    for (double x : row) require(x > 0.0, "M must be positive");

  require(static_cast<int>(econ.lmp.size()) == K, "lmp length must match time grid");
  require(static_cast<int>(econ.lmp_carbon.size()) == K, "lmp_carbon length must match time grid");
  require(static_cast<int>(econ.marginal_emission.size()) == K,
          "marginal_emission length must match time grid");
  for (double r : econ.marginal_emission) require(r >= 0.0, "marginal_emission must be >= 0");
  require(econ.carbon_penalty >= 0.0, "carbon_penalty must be >= 0");
  require(econ.carbon_env_cost >= econ.carbon_penalty, "carbon_env_cost must be >= carbon_penalty");
  require(econ.rate_of_return >= 0.0, "rate_of_return must be >= 0");
  require(econ.utility_capital >= 0.0, "utility_capital must be >= 0");
  require(econ.grid_emission_factor >= 0.0, "grid_emission_factor must be >= 0");
  require(static_cast<int>(econ.hosting.size()) == n, "hosting must cover every node");
  for (double h : econ.hosting) require(h >= 0.0, "hosting capacity must be >= 0");
  require(econ.reactive_ratio.empty() || static_cast<int>(econ.reactive_ratio.size()) == n,
          "reactive_ratio must cover every node");

  require((stance == Stance::NotApplicable) == (info == InfoCase::CompleteInfo),
          "stance must be 'na' exactly for the complete-information case");
  require(beliefs.has_value() == (info != InfoCase::CompleteInfo),
          "beliefs must be present exactly for asymmetric cases");
  if (beliefs) {
    require(static_cast<int>(beliefs->hosting.size()) == n, "belief hosting must cover every node");
    for (double h : beliefs->hosting) require(h >= 0.0, "belief hosting must be >= 0");
    require(beliefs->alpha_demand > 0.0, "alpha_demand must be positive");
    require(beliefs->stance == stance, "belief stance must match scenario stance");
  }
  require(solver.rho0 > solver.rho_min && solver.rho_min > 0.0, "solver: need rho0 > rho_min > 0");
  require(solver.shrink > 0.0 && solver.shrink < 1.0, "solver: need 0 < shrink < 1");
}

BeliefModel default_beliefs(const Scenario& s, InfoCase c, Stance st) {
  BeliefModel b;
  b.stance = st;
  b.hosting = s.econ.hosting;
  const bool opt = st == Stance::Optimistic;
  if (c == InfoCase::HostingAsym || c == InfoCase::BothAsym) {
    const double f = opt ? s.belief_defaults.hosting_optimistic : s.belief_defaults.hosting_pessimistic;
    for (double& h : b.hosting) h *= f;
  }
  if (c == InfoCase::ConsumerAsym || c == InfoCase::BothAsym)
    b.alpha_demand = opt ? s.belief_defaults.alpha_optimistic : s.belief_defaults.alpha_pessimistic;
  return b;
}

std::string scenario_id(Policy p, InfoCase c, Stance s, bool carbon) {
  std::string id = "case" + std::to_string(case_number(c)) + "_" + to_string(p);
  if (s != Stance::NotApplicable) id += std::string("_") + to_string(s);
  id += carbon ? "_carbon" : "_nocarbon";
  return id;
}

std::vector<Scenario> case_matrix(const Scenario& base, const MatrixFilter& filter) {
  std::vector<Scenario> out;
  auto emit = [&](Policy p, InfoCase c, Stance st) {
    for (bool carbon : filter.carbon) {
      Scenario s = base;
      s.policy = p;
      s.info = c;
      s.stance = st;
      s.carbon = carbon;
      s.beliefs.reset();
      if (c != InfoCase::CompleteInfo) s.beliefs = default_beliefs(base, c, st);
      s.id = scenario_id(p, c, st, carbon);
      out.push_back(std::move(s));
    }
  };
  for (Policy p : filter.policies) {
    emit(p, InfoCase::CompleteInfo, Stance::NotApplicable);
    for (InfoCase c : {InfoCase::HostingAsym, InfoCase::ConsumerAsym, InfoCase::BothAsym})
      for (Stance st : {Stance::Optimistic, Stance::Pessimistic}) emit(p, c, st);
  }
  return out;
}

Scenario matrix_scenario(const Scenario& base, const std::string& id) {
  for (auto& s : case_matrix(base))
    if (s.id == id) return s;
  throw ValidationError("unknown scenario id '" + id + "'");
}

// ---------------------------------------------------------------------------
// File format

namespace {

template <typename T>
T get(const YAML::Node& n, const std::string& key, const std::string& ctx) {
  const YAML::Node v = n[key];
  if (!v) throw ParseError(ctx + ": missing key '" + key + "'");
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    throw ParseError(ctx + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const YAML::Node& n, const std::string& key, T fallback, const std::string& ctx) {
  return n[key] ? get<T>(n, key, ctx) : fallback;
}

// A per-(t, r) series may list one value per interval (repeated for every
// representative day) or one per flattened (t, r).
std::vector<double> series(const YAML::Node& n, const std::string& key, const TimeStructure& ts,
                           const std::string& ctx) {
  const YAML::Node v = n[key];
  if (!v) throw ParseError(ctx + ": missing key '" + key + "'");
  std::vector<double> raw;
  if (v.IsScalar()) raw.assign(1, get<double>(n, key, ctx));
  else raw = get<std::vector<double>>(n, key, ctx);
  if (raw.size() == 1) return std::vector<double>(ts.size(), raw[0]);
  if (static_cast<int>(raw.size()) == ts.size()) return raw;
  if (static_cast<int>(raw.size()) == ts.intervals) {
    std::vector<double> out;
    for (int r = 0; r < ts.days; ++r) out.insert(out.end(), raw.begin(), raw.end());
    return out;
  }
  throw ValidationError(ctx + "." + key + " length must match time grid");
}

std::vector<double> per_node(const YAML::Node& n, const std::vector<std::string>& nodes,
                             const std::string& ctx) {
  std::vector<double> out;
  for (const auto& id : nodes) out.push_back(get<double>(n, id, ctx));
  if (n.size() != nodes.size()) throw ValidationError(ctx + " names an unknown node");
  return out;
}

void emit_series(YAML::Emitter& e, const std::vector<double>& v) {
  e << YAML::Flow << v;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("malformed scenario file: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("scenario file must be a mapping");
  Scenario s;
  s.id = get_or<std::string>(root, "id", "scenario", "root");

  const YAML::Node net = root["network"];
  if (!net) throw ParseError("root: missing key 'network'");
  s.network.nodes = get<std::vector<std::string>>(net, "nodes", "network");
  s.network.root = get<std::string>(net, "root", "network");
  s.network.transmission_node = get_or<std::string>(net, "transmission_node", "T", "network");
  s.network.interface_limit = get<double>(net, "interface_limit", "network");
  s.network.u_min = get_or<double>(net, "u_min", s.network.u_min, "network");
  s.network.u_max = get_or<double>(net, "u_max", s.network.u_max, "network");
  s.network.u_root = get_or<double>(net, "u_root", s.network.u_root, "network");
  const YAML::Node lines = net["lines"];
  if (!lines || !lines.IsSequence()) throw ParseError("network: 'lines' must be a list");
  for (const auto& ln : lines) {
    Line l;
    l.from = get<std::string>(ln, "from", "line");
    l.to = get<std::string>(ln, "to", "line");
    l.resistance = get<double>(ln, "resistance", "line");
    l.reactance = get<double>(ln, "reactance", "line");
    l.s_max = get<double>(ln, "s_max", "line");
    s.network.lines.push_back(l);
  }
  s.network.finalize();
  const auto& nodes = s.network.nodes;

  const YAML::Node tm = root["time"];
  if (!tm) throw ParseError("root: missing key 'time'");
  s.times.intervals = get<int>(tm, "intervals", "time");
  s.times.days = get_or<int>(tm, "days", 1, "time");
  if (s.times.intervals <= 0 || s.times.days <= 0) throw ValidationError("time structure must be nonempty");
  if (tm["duration"] && tm["duration"].IsSequence())
    s.times.duration = get<std::vector<double>>(tm, "duration", "time");
  else
    s.times.duration.assign(s.times.intervals, get_or<double>(tm, "duration", 1.0, "time"));
  s.times.peak = get<std::vector<int>>(tm, "peak", "time");

  const YAML::Node gens = root["generators"];
  if (!gens || !gens.IsSequence()) throw ParseError("root: 'generators' must be a list");
  for (const auto& g : gens) {
    Generator u;
    u.id = get<std::string>(g, "id", "generator");
    const std::string ctx = "generator " + u.id;
    u.node = get<std::string>(g, "node", ctx);
    const std::string owner = get_or<std::string>(g, "owner", "utility", ctx);
    if (owner == "utility") u.owner = Owner::Utility;
    else if (owner == "aggregator") u.owner = Owner::Aggregator;
    else throw ValidationError(ctx + ": owner must be 'utility' or 'aggregator'");
    u.cost = get<double>(g, "cost", ctx);
    u.emission_factor = get_or<double>(g, "emission_factor", 0.0, ctx);
    if (u.owner == Owner::Utility) {
      u.p_min = get_or<double>(g, "p_min", 0.0, ctx);
      u.p_max = get<double>(g, "p_max", ctx);
      u.q_min = get_or<double>(g, "q_min", 0.0, ctx);
      u.q_max = get_or<double>(g, "q_max", 0.0, ctx);
    } else {
      u.invest_cost = get<double>(g, "invest_cost", ctx);
      u.capacity_factor = get_or<double>(g, "capacity_factor", 1.0, ctx);
      u.forecast = series(g, "forecast", s.times, ctx);
    }
    s.generators.push_back(u);
  }

  const YAML::Node dem = root["demand"];
  if (!dem) throw ParseError("root: missing key 'demand'");
  s.demand.utility_n = get<double>(dem, "N", "demand");
  const YAML::Node dn = dem["nodes"];
  if (!dn || !dn.IsMap()) throw ParseError("demand: 'nodes' must be a mapping");
  for (const auto& id : nodes) {
    const YAML::Node d = dn[id];
    const std::string ctx = "demand." + id;
    if (!d) throw ValidationError(ctx + ": missing node");
    s.demand.inflexible_p.push_back(series(d, "p", s.times, ctx));
    s.demand.inflexible_q.push_back(series(d, "q", s.times, ctx));
    s.demand.utility_m.push_back(series(d, "M", s.times, ctx));
  }
  if (dn.size() != nodes.size()) throw ValidationError("demand names an unknown node");

  const YAML::Node ec = root["economics"];
  if (!ec) throw ParseError("root: missing key 'economics'");
  s.econ.lmp = series(ec, "lmp", s.times, "economics");
  s.econ.marginal_emission = series(ec, "marginal_emission", s.times, "economics");
  s.econ.carbon_penalty = get<double>(ec, "carbon_penalty", "economics");
  s.econ.carbon_env_cost = get<double>(ec, "carbon_env_cost", "economics");
  if (ec["lmp_carbon"]) {
    s.econ.lmp_carbon = series(ec, "lmp_carbon", s.times, "economics");
  } else {
    s.econ.lmp_carbon = s.econ.lmp;
    for (int k = 0; k < s.times.size(); ++k)
      s.econ.lmp_carbon[k] += s.econ.carbon_penalty * s.econ.marginal_emission[k];
  }
  s.econ.utility_capital = get<double>(ec, "utility_capital", "economics");
  s.econ.rate_of_return = get<double>(ec, "rate_of_return", "economics");
  s.econ.grid_emission_factor = get<double>(ec, "grid_emission_factor", "economics");
  if (!ec["hosting"]) throw ParseError("economics: missing key 'hosting'");
  s.econ.hosting = per_node(ec["hosting"], nodes, "economics.hosting");
  if (ec["reactive_ratio"]) s.econ.reactive_ratio = per_node(ec["reactive_ratio"], nodes, "economics.reactive_ratio");

  if (const YAML::Node bd = root["belief_defaults"]) {
    s.belief_defaults.hosting_optimistic = get_or<double>(bd, "hosting_optimistic", 1.2, "belief_defaults");
    s.belief_defaults.hosting_pessimistic = get_or<double>(bd, "hosting_pessimistic", 0.8, "belief_defaults");
    s.belief_defaults.alpha_optimistic = get_or<double>(bd, "alpha_optimistic", 1.2, "belief_defaults");
    s.belief_defaults.alpha_pessimistic = get_or<double>(bd, "alpha_pessimistic", 0.8, "belief_defaults");
  }

  if (const YAML::Node sc = root["scenario"]) {
    s.policy = parse_policy(get_or<std::string>(sc, "policy", "nem", "scenario"));
    s.info = parse_case(get_or<std::string>(sc, "case", "complete", "scenario"));
    s.stance = parse_stance(get_or<std::string>(sc, "stance", "na", "scenario"));
    s.carbon = get_or<bool>(sc, "carbon", false, "scenario");
    if (const YAML::Node b = sc["beliefs"]) {
      BeliefModel bm = default_beliefs(s, s.info, s.stance);
      if (b["hosting"]) bm.hosting = per_node(b["hosting"], nodes, "scenario.beliefs.hosting");
      bm.alpha_demand = get_or<double>(b, "alpha", bm.alpha_demand, "scenario.beliefs");
      if (b["reactive_ratio"]) bm.reactive_ratio = get<double>(b, "reactive_ratio", "scenario.beliefs");
      s.beliefs = bm;
    } else if (s.info != InfoCase::CompleteInfo) {
      s.beliefs = default_beliefs(s, s.info, s.stance);
    }
  }

  if (const YAML::Node so = root["solver"]) {
    s.solver.rho0 = get_or<double>(so, "rho0", s.solver.rho0, "solver");
    s.solver.shrink = get_or<double>(so, "shrink", s.solver.shrink, "solver");
    s.solver.rho_min = get_or<double>(so, "rho_min", s.solver.rho_min, "solver");
    s.solver.accept_residual = get_or<double>(so, "accept_residual", s.solver.accept_residual, "solver");
    s.solver.nlp_tol = get_or<double>(so, "nlp_tol", s.solver.nlp_tol, "solver");
    s.solver.max_iter = get_or<int>(so, "max_iter", s.solver.max_iter, "solver");
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize(const Scenario& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << s.id;

  const Network& n = s.network;
  e << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "nodes" << YAML::Value << YAML::Flow << n.nodes;
  e << YAML::Key << "root" << YAML::Value << n.root;
  e << YAML::Key << "transmission_node" << YAML::Value << n.transmission_node;
  e << YAML::Key << "interface_limit" << YAML::Value << n.interface_limit;
  e << YAML::Key << "u_min" << YAML::Value << n.u_min;
  e << YAML::Key << "u_max" << YAML::Value << n.u_max;
  e << YAML::Key << "u_root" << YAML::Value << n.u_root;
  e << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : n.lines) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << l.from << YAML::Key
      << "to" << YAML::Value << l.to << YAML::Key << "resistance" << YAML::Value << l.resistance
      << YAML::Key << "reactance" << YAML::Value << l.reactance << YAML::Key << "s_max"
      << YAML::Value << l.s_max << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "intervals" << YAML::Value << s.times.intervals;
  e << YAML::Key << "days" << YAML::Value << s.times.days;
  e << YAML::Key << "duration" << YAML::Value << YAML::Flow << s.times.duration;
  e << YAML::Key << "peak" << YAML::Value << YAML::Flow << s.times.peak;
  e << YAML::EndMap;

  e << YAML::Key << "generators" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : s.generators) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << g.id;
    e << YAML::Key << "node" << YAML::Value << g.node;
    e << YAML::Key << "owner" << YAML::Value << (g.owner == Owner::Utility ? "utility" : "aggregator");
    e << YAML::Key << "cost" << YAML::Value << g.cost;
    e << YAML::Key << "emission_factor" << YAML::Value << g.emission_factor;
    if (g.owner == Owner::Utility) {
      e << YAML::Key << "p_min" << YAML::Value << g.p_min;
      e << YAML::Key << "p_max" << YAML::Value << g.p_max;
      e << YAML::Key << "q_min" << YAML::Value << g.q_min;
      e << YAML::Key << "q_max" << YAML::Value << g.q_max;
    } else {
      e << YAML::Key << "invest_cost" << YAML::Value << g.invest_cost;
      e << YAML::Key << "capacity_factor" << YAML::Value << g.capacity_factor;
      e << YAML::Key << "forecast" << YAML::Value;
      emit_series(e, g.forecast);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "demand" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "N" << YAML::Value << s.demand.utility_n;
  e << YAML::Key << "nodes" << YAML::Value << YAML::BeginMap;
  for (int b = 0; b < n.num_nodes(); ++b) {
    e << YAML::Key << n.nodes[b] << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "p" << YAML::Value;
    emit_series(e, s.demand.inflexible_p[b]);
    e << YAML::Key << "q" << YAML::Value;
    emit_series(e, s.demand.inflexible_q[b]);
    e << YAML::Key << "M" << YAML::Value;
    emit_series(e, s.demand.utility_m[b]);
    e << YAML::EndMap;
  }
  e << YAML::EndMap << YAML::EndMap;

  auto node_map = [&](const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginMap;
    for (int b = 0; b < n.num_nodes(); ++b) e << YAML::Key << n.nodes[b] << YAML::Value << v[b];
    e << YAML::EndMap;
  };

  e << YAML::Key << "economics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lmp" << YAML::Value;
  emit_series(e, s.econ.lmp);
  e << YAML::Key << "lmp_carbon" << YAML::Value;
  emit_series(e, s.econ.lmp_carbon);
  e << YAML::Key << "marginal_emission" << YAML::Value;
  emit_series(e, s.econ.marginal_emission);
  e << YAML::Key << "carbon_penalty" << YAML::Value << s.econ.carbon_penalty;
  e << YAML::Key << "carbon_env_cost" << YAML::Value << s.econ.carbon_env_cost;
  e << YAML::Key << "utility_capital" << YAML::Value << s.econ.utility_capital;
  e << YAML::Key << "rate_of_return" << YAML::Value << s.econ.rate_of_return;
  e << YAML::Key << "grid_emission_factor" << YAML::Value << s.econ.grid_emission_factor;
  e << YAML::Key << "hosting" << YAML::Value;
  node_map(s.econ.hosting);
  if (!s.econ.reactive_ratio.empty()) {
    e << YAML::Key << "reactive_ratio" << YAML::Value;
    node_map(s.econ.reactive_ratio);
  }
  e << YAML::EndMap;

  const BeliefDefaults& bd = s.belief_defaults;
  e << YAML::Key << "belief_defaults" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "hosting_optimistic" << YAML::Value << bd.hosting_optimistic;
  e << YAML::Key << "hosting_pessimistic" << YAML::Value << bd.hosting_pessimistic;
  e << YAML::Key << "alpha_optimistic" << YAML::Value << bd.alpha_optimistic;
  e << YAML::Key << "alpha_pessimistic" << YAML::Value << bd.alpha_pessimistic;
  e << YAML::EndMap;

  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "policy" << YAML::Value << to_string(s.policy);
  e << YAML::Key << "case" << YAML::Value << to_string(s.info);
  e << YAML::Key << "stance" << YAML::Value << to_string(s.stance);
  e << YAML::Key << "carbon" << YAML::Value << s.carbon;
  if (s.beliefs) {
    e << YAML::Key << "beliefs" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "hosting" << YAML::Value;
    node_map(s.beliefs->hosting);
    e << YAML::Key << "alpha" << YAML::Value << s.beliefs->alpha_demand;
    if (s.beliefs->reactive_ratio)
      e << YAML::Key << "reactive_ratio" << YAML::Value << *s.beliefs->reactive_ratio;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  const SolverSettings& so = s.solver;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "rho0" << YAML::Value << so.rho0;
  e << YAML::Key << "shrink" << YAML::Value << so.shrink;
  e << YAML::Key << "rho_min" << YAML::Value << so.rho_min;
  e << YAML::Key << "accept_residual" << YAML::Value << so.accept_residual;
  e << YAML::Key << "nlp_tol" << YAML::Value << so.nlp_tol;
  e << YAML::Key << "max_iter" << YAML::Value << so.max_iter;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace dergame
