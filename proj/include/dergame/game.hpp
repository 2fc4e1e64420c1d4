#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dergame/kkt.hpp"
#include "dergame/welfare.hpp"

namespace dergame {

/// Adds the regulator's objective (welfare, maximized), revenue adequacy and
/// the KKT system to build.mpec. The objective and the adequacy row are
/// divided by total hours times the node count, so both are O($/MWh).
void assemble_mpec(KktBuild& build, const Scenario& s);

/// Welfare as an expression over the MPEC variables (undivided). Tariff
/// payments and DER payments cancel between the surplus blocks.
QuadExpr welfare_expression(const KktBuild& build, const Scenario& s);

/// Tariff revenue minus (1 + upsilon) C_cap minus operating cost (undivided).
QuadExpr revenue_adequacy_expression(const KktBuild& build, const Scenario& s);

/// Feasible starting point of the MPEC: for a fixed peak/off-peak ratio,
/// iterate consumer response, the capped sizing rule, the lower level and
/// the compensation rule, rescaling the tariff to restore revenue adequacy.
struct FixedPoint {
  std::vector<double> point;  // over build.mpec.nlp() variables
  double residual = 0.0;      // KKT residual of the point
  int iterations = 0;
};
FixedPoint fixed_point_start(const KktBuild& build, const Scenario& s, double peak_ratio, int max_iter = 60);

struct GameDiagnostics {
  std::vector<StageRecord> trace;
  KktResidualReport kkt;
  ComplementarityResidual complementarity;
  double seconds = 0.0;
  int start = -1;  // winning start index
};

struct Slsf1Solution {
  std::vector<double> g_max;                   // per node
  std::vector<double> tariff;                  // per k, internal
  std::vector<std::vector<double>> pi_der;     // [node][k]
  std::vector<bool> capped;                    // sizing rule at the hosting bound
  std::vector<bool> nonpositive_denominator;   // closed form undefined at the solution prices
  double objective = 0.0;
  GameDiagnostics diag;
};

struct Slsf2Solution {
  MarketPoint point;
  std::vector<std::vector<double>> dlmp;       // balance duals [node][k]
  std::vector<double> tau_bar;                 // capacity duals per line
  std::vector<std::vector<double>> cap_dual;   // phi [node][k], 0 where absent
  std::vector<double> stranded;                // g* - min(g*, H) per node
  double objective = 0.0;
  GameDiagnostics diag;
};

struct GameOutcome {
  std::string scenario_id;
  std::optional<Slsf1Solution> slsf1;
  std::optional<Slsf2Solution> slsf2;
  std::optional<WelfareReport> welfare;
  std::vector<std::string> diagnostics;  // capping events, stranded capacity, failures
  std::string error;                     // empty on success
  double seconds = 0.0;
  bool ok() const { return error.empty() && welfare.has_value(); }
};

class GameError : public std::runtime_error {
 public:
  GameError(const std::string& what, std::vector<StageRecord> trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  std::vector<StageRecord> trace;
};

/// First game under the case's beliefs. Throws GameError.
Slsf1Solution solve_slsf1(const Scenario& s);
/// Second game on true data with capacity fixed. Throws GameError.
Slsf2Solution solve_slsf2(const Scenario& s, const std::vector<double>& g_max_star);
/// Both games and the welfare evaluation. Failures are reported in the outcome.
GameOutcome run_case(const Scenario& s);

}  // namespace dergame
