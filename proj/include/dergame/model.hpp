#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dergame {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Line {
  std::string from;
  std::string to;
  double resistance = 0.0;  // X, pu
  double reactance = 0.0;   // x, pu
  double s_max = 0.0;       // MVA

  bool operator==(const Line&) const = default;
};

/// Radial feeder. Node and line indices are positions in `nodes` / `lines`.
class Network {
 public:
  std::vector<std::string> nodes;
  std::string root;
  std::vector<Line> lines;
  std::string transmission_node = "T";
  double interface_limit = 0.0;  // MW
  double u_min = 0.9 * 0.9;      // squared voltage bounds, pu^2
  double u_max = 1.1 * 1.1;
  double u_root = 1.0;

  /// Checks the invariants and builds the parent/child maps.
  void finalize();

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int index(const std::string& node) const;
  int root_index() const { return root_; }
  /// -1 for the root.
  int parent(int b) const { return parent_[b]; }
  /// Line whose `to` end is b; -1 for the root.
  int line_into(int b) const { return line_into_[b]; }
  const std::vector<int>& out_lines(int b) const { return out_lines_[b]; }
  int line_from(int l) const { return from_[l]; }
  int line_to(int l) const { return to_[l]; }
  /// Nodes ordered so that every parent precedes its children.
  const std::vector<int>& topological_order() const { return order_; }

  bool operator==(const Network& o) const {
    return nodes == o.nodes && root == o.root && lines == o.lines &&
           transmission_node == o.transmission_node && interface_limit == o.interface_limit &&
           u_min == o.u_min && u_max == o.u_max && u_root == o.u_root;
  }

 private:
  int root_ = -1;
  std::vector<int> parent_, line_into_, from_, to_, order_;
  std::vector<std::vector<int>> out_lines_;
};

enum class Owner { Utility, Aggregator };

struct Generator {
  std::string id;
  std::string node;
  Owner owner = Owner::Utility;
  double cost = 0.0;  // $/MWh
  double p_min = 0.0, p_max = 0.0;
  double q_min = 0.0, q_max = 0.0;
  double emission_factor = 0.0;  // ton/MWh
  // Aggregator units only.
  double invest_cost = 0.0;      // $/MW per representative day
  double capacity_factor = 1.0;  // kappa
  std::vector<double> forecast;  // kappa' per (t, r), flattened

  bool operator==(const Generator&) const = default;
};

/// Intervals t = 0..T-1 repeated over representative days r = 0..R-1.
/// Flattened index k = r * T + t.
struct TimeStructure {
  int intervals = 1;
  int days = 1;
  std::vector<double> duration;  // hours per interval (size T)
  std::vector<int> peak;         // interval indices in the peak block

  int size() const { return intervals * days; }
  int interval(int k) const { return k % intervals; }
  int day(int k) const { return k / intervals; }
  double weight(int k) const { return duration[interval(k)]; }
  bool is_peak(int k) const;
  double total_hours() const;

  bool operator==(const TimeStructure&) const = default;
};

/// Per node, per flattened (t, r).
struct DemandProfile {
  std::vector<std::vector<double>> inflexible_p;  // MW
  std::vector<std::vector<double>> inflexible_q;  // MVAr
  std::vector<std::vector<double>> utility_m;     // M, $/MWh
  double utility_n = 1.0;                         // N, $/MWh^2

  bool operator==(const DemandProfile&) const = default;
};

struct EconomicEnv {
  std::vector<double> lmp;            // lambda^T without carbon pricing, per (t, r)
  std::vector<double> lmp_carbon;     // with carbon pricing
  std::vector<double> marginal_emission;  // R of the marginal transmission unit, per (t, r)
  double carbon_penalty = 0.0;        // gamma, $/ton
  double carbon_env_cost = 0.0;       // gamma^EC, $/ton
  double utility_capital = 0.0;       // $/day
  double rate_of_return = 0.0;
  std::vector<double> hosting;        // H_b per node, MW
  double grid_emission_factor = 0.0;  // E(g) = factor * g, ton/MWh
  std::vector<double> reactive_ratio; // phi per node; empty = true Q/P ratio

  bool operator==(const EconomicEnv&) const = default;
};

enum class Policy { NEM, VS, DLMP };
enum class InfoCase { CompleteInfo, HostingAsym, ConsumerAsym, BothAsym };
enum class Stance { NotApplicable, Optimistic, Pessimistic };

const char* to_string(Policy p);
const char* to_string(InfoCase c);
const char* to_string(Stance s);
Policy parse_policy(const std::string& s);
InfoCase parse_case(const std::string& s);
Stance parse_stance(const std::string& s);
int case_number(InfoCase c);  // 1..4

/// The aggregator's view of the system for one run.
struct BeliefModel {
  std::vector<double> hosting;  // h_b^DER per node (used when hosting asymmetry is active)
  double alpha_demand = 1.0;
  std::optional<double> reactive_ratio;  // phi; unset = true Q/P ratio
  Stance stance = Stance::NotApplicable;

  bool operator==(const BeliefModel&) const = default;
};

/// Magnitudes used to derive a BeliefModel from a stance.
struct BeliefDefaults {
  double hosting_optimistic = 1.2;
  double hosting_pessimistic = 0.8;
  double alpha_optimistic = 1.2;
  double alpha_pessimistic = 0.8;

  bool operator==(const BeliefDefaults&) const = default;
};

struct SolverSettings {
  double rho0 = 1.0;
  double shrink = 0.1;
  double rho_min = 1e-8;
  double accept_residual = 1e-6;
  double nlp_tol = 1e-8;
  int max_iter = 3000;

  bool operator==(const SolverSettings&) const = default;
};

struct Scenario {
  std::string id;
  Network network;
  std::vector<Generator> generators;
  DemandProfile demand;
  TimeStructure times;
  EconomicEnv econ;
  Policy policy = Policy::NEM;
  InfoCase info = InfoCase::CompleteInfo;
  Stance stance = Stance::NotApplicable;
  bool carbon = false;
  std::optional<BeliefModel> beliefs;
  BeliefDefaults belief_defaults;
  SolverSettings solver;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  /// LMP series for the active carbon setting.
  const std::vector<double>& lmp() const { return carbon ? econ.lmp_carbon : econ.lmp; }
  /// gamma for the active carbon setting.
  double gamma() const { return carbon ? econ.carbon_penalty : 0.0; }
  /// Aggregator unit at node b, or nullptr.
  const Generator* der_at(int b) const;
  std::vector<const Generator*> utility_units() const;

  bool operator==(const Scenario&) const = default;
};

/// Belief model implied by a stance and case, using the scenario's defaults.
BeliefModel default_beliefs(const Scenario& s, InfoCase c, Stance st);

/// Scenario id such as "case2_vs_optimistic_carbon".
std::string scenario_id(Policy p, InfoCase c, Stance s, bool carbon);

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
std::string serialize(const Scenario& s);

struct MatrixFilter {
  std::vector<Policy> policies{Policy::NEM, Policy::VS, Policy::DLMP};
  std::vector<bool> carbon{false, true};
};

/// Policy-major expansion: per policy, Case 1 then Cases 2-4 x {optimistic,
/// pessimistic}, each with the carbon settings in filter order.
std::vector<Scenario> case_matrix(const Scenario& base, const MatrixFilter& filter = {});

/// Finds the matrix entry with the given id; throws ValidationError if absent.
Scenario matrix_scenario(const Scenario& base, const std::string& id);

}  // namespace dergame
