#pragma once

#include <utility>
#include <string>
#include <vector>

#include "dergame/model.hpp"
#include "dergame/nlp.hpp"

namespace dergame {

/// Primal LinDistFlow quantities over the flattened (t, r) grid.
struct FlowState {
  std::vector<double> root_p, root_q;          // g_b0, q_b0 per k
  std::vector<std::vector<double>> gen_p, gen_q;  // utility units [unit][k]
  std::vector<std::vector<double>> der;          // g^D [node][k] (zeros where no DER)
  std::vector<std::vector<double>> flow_p, flow_q;  // [line][k]
  std::vector<std::vector<double>> voltage;      // u [node][k], root included

  /// Zero-initialized state for the scenario's dimensions.
  static FlowState zeros(const Scenario& s);
};

struct BalanceResiduals {
  std::vector<std::vector<double>> active, reactive;  // [node][k]
  double max_abs() const;
};

/// g + g^D + inflow - demand - outflow per node (root adds g_b0, q_b0).
BalanceResiduals balance_residuals(const FlowState& st, const Scenario& s,
                                   const std::vector<std::vector<double>>& demand_p,
                                   const std::vector<std::vector<double>>& demand_q);

/// u_b - u_parent + 2 (X f^p + x f^q) on the line into b; zero at the root
/// when u_root matches the network's fixed root voltage.
std::vector<std::vector<double>> voltage_residuals(const FlowState& st, const Network& net);

/// max(0, |(f^p, f^q)| - s_max) per [line][k].
std::vector<std::vector<double>> capacity_violation(const FlowState& st, const Network& net);

struct Emissions {
  std::vector<double> by_node;  // e_b, ton
  double total = 0.0;           // e
  double interface = 0.0;       // E(g_b0)
};

Emissions emissions(const FlowState& st, const Scenario& s);

/// Data the lower level takes from outside: expressions over host variables
/// (or constants for a standalone solve).
struct LlInputs {
  std::vector<std::vector<QuadExpr>> demand_p, demand_q;  // [node][k], as seen by the utility
  std::vector<std::vector<QuadExpr>> pi_der;              // [node][k]; ignored where no DER
  std::vector<QuadExpr> der_capacity;                     // g_max per node
  /// Optional cap g^D <= value per node (parametrized second game). Empty = none.
  std::vector<double> dispatch_cap;
};

enum class LlRow {
  BalanceP, BalanceQ, Voltage, VoltageLo, VoltageHi, GenLo, GenHi, GenQLo, GenQHi,
  ImportLo, ImportHi, DerLo, DerAvail, DerCap, LineCapacity
};
const char* to_string(LlRow r);

struct LlConstraint {
  QuadExpr expr;  // == 0 or >= 0
  bool equality = false;
  LlRow family = LlRow::BalanceP;
  int index = -1;  // node, line or unit
  int k = -1;
  std::string label;
};

/// The utility's cost-minimization problem laid out in a host NLP. Every
/// per-period row is multiplied by the period duration, so row multipliers
/// are in $/MWh. Line capacity is the concave row
/// w (s_max^2 - f^p^2 - f^q^2) / (2 s_max) >= 0: the apparent power S of the
/// cone (S, f^p, f^q) only appears in S <= s_max, so S sits at s_max and the
/// row's multiplier y gives the cone multiplier y (1, -f^p / s_max, -f^q / s_max).
struct LlModel {
  std::vector<VarId> root_p, root_q;
  std::vector<std::vector<VarId>> gen_p, gen_q;  // [unit][k]
  std::vector<int> units;                        // scenario generator index per unit
  std::vector<std::vector<VarId>> der;           // [node][k]; empty row: no DER, -1: nothing available
  std::vector<std::vector<VarId>> flow_p, flow_q;
  std::vector<std::vector<VarId>> voltage;       // [node][k], -1 at the root

  std::vector<VarId> primals;
  std::vector<double> primal_scale;  // weight multiplying each primal's stationarity row

  QuadExpr objective;  // minimized
  std::vector<LlConstraint> constraints;

  std::vector<std::vector<int>> balance_p, balance_q;  // constraint index [node][k]
  std::vector<std::vector<int>> line_capacity;         // constraint index [line][k]

  /// Multiplier of S <= s_max per line: sum_k w_k y_{l,k} / total hours,
  /// as a linear map over the capacity-row multipliers.
  std::vector<std::vector<std::pair<int, double>>> tau_bar_terms(const Scenario& s) const;

  FlowState extract(const Scenario& s, const std::vector<double>& x) const;
};

/// Adds the lower-level primal variables to `host` (unbounded; bounds are
/// explicit rows) and returns the model. Nothing is added to host rows.
LlModel build_ll(NlpProblem& host, const Scenario& s, const LlInputs& in);

struct LlSolution {
  NlpStatus status = NlpStatus::NumericalFailure;
  FlowState state;
  double cost = 0.0;
  std::vector<double> row_duals;                 // per LlModel constraint, >= 0 for inequalities
  std::vector<double> tau_bar;                   // per line
  std::vector<double> x;                         // host point (LL primals only)
  LlModel model;
};

/// Solves the lower level with constant inputs. `warm` (a previous host point
/// of the same layout) is optional.
LlSolution solve_ll(const Scenario& s, const LlInputs& in, const std::vector<double>* warm = nullptr,
                    const NlpSettings& settings = {});

}  // namespace dergame
