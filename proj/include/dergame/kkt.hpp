#pragma once

#include <string>
#include <vector>

#include "dergame/beliefs.hpp"
#include "dergame/distflow.hpp"
#include "dergame/mpec.hpp"

namespace dergame {

/// First-order system of the lower level: one stationarity row per LL primal,
/// one complementarity pair per LL inequality (line capacity included), plus
/// the equality rows. Follower conditions outside the utility's
/// problem (consumer response, aggregator sizing rule) and the policy rows
/// tying pi^DER to prices or duals are carried alongside.
/// Registered rows are divided by their duration weight, so slacks are in
/// MW (pu, MVA^2 / MVA) and multipliers in $/MWh.
struct KktSystem {
  std::vector<Constraint> stationarity;   // expr == 0, in $/MWh
  std::vector<VarId> stationarity_var;
  std::vector<Constraint> equalities;     // LL equality rows (balances, voltage drop)
  std::vector<ComplementarityPair> pairs; // LL inequalities, then followers
  std::vector<Constraint> policy;         // pi^DER definitions

  std::vector<VarId> row_dual;  // per LL constraint
  int ll_pairs = 0;             // pairs that come from LL inequalities
};

/// Appends dual variables to `host` and builds the system for `ll`. The
/// Lagrangian is f - y^T c (cost minimization, c >= 0, y >= 0).
KktSystem build_kkt(NlpProblem& host, const LlModel& ll, const Scenario& s);

/// Variables the lower level takes as parameters, plus the followers.
struct GameLayout {
  std::vector<VarId> tariff_peak, tariff_offpeak;  // per representative day
  std::vector<std::vector<VarId>> demand;          // flexible d [node][k]
  std::vector<std::vector<VarId>> pi_der;          // [node][k]; empty row where no DER
  std::vector<VarId> g_max;                        // per node; -1 where no DER or fixed
  std::vector<double> g_fixed;                     // second game: capacity per node
  std::vector<double> g_available;                 // second game: min(g_fixed, true H)

  QuadExpr tariff(const Scenario& s, int k) const;
  QuadExpr capacity(int b) const;
};

struct KktBuild {
  MpecProblem mpec;  // variables only; rows are added by assemble_mpec
  GameLayout ul;
  LlModel ll;
  KktSystem kkt;
  LowerLevelView view;
  bool second_game = false;
};

/// First game: the lower level under the case's belief view, with the
/// aggregator sizing rule 0 <= C_inv - kbar g (C_inv - margin) _|_ h - g >= 0.
KktBuild build_ll_kkt(const Scenario& s);

/// Second game: true data, capacity fixed at g_max_star, availability based on
/// min(g_max_star, H), plus the pair 0 <= g_max_star - g^D _|_ phi >= 0.
KktBuild build_slsf2_kkt(const Scenario& s, const std::vector<double>& g_max_star);

struct KktResidualReport {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double feasibility = 0.0;
  double max() const;
};

/// Exact residuals: stationarity rows, min-form pairs, equality rows plus
/// sign violations.
KktResidualReport kkt_residual(const KktSystem& sys, const std::vector<double>& point);

/// Human-readable listing of every row with its family.
std::string dump(const KktSystem& sys, const NlpProblem& host);

}  // namespace dergame
