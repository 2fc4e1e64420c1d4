#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dergame/nlp.hpp"

namespace dergame {

/// 0 <= lhs  _|_  rhs >= 0
struct ComplementarityPair {
  QuadExpr lhs;
  QuadExpr rhs;
  std::string label;
};

/// primal in K, dual in K*, <primal, dual> = 0, with
/// K = {x in R^3 : x0 >= sqrt(x1^2 + x2^2)} (self-dual).
struct ConeComplementarity {
  std::array<QuadExpr, 3> primal;
  std::array<QuadExpr, 3> dual;
  std::string label;
};

/// Smooth NLP core plus a registry of complementarity conditions.
class MpecProblem {
 public:
  NlpProblem& nlp() { return nlp_; }
  const NlpProblem& nlp() const { return nlp_; }

  /// Throws std::invalid_argument if the label is already registered.
  void add_pair(QuadExpr lhs, QuadExpr rhs, std::string label);
  void add_cone(std::array<QuadExpr, 3> primal, std::array<QuadExpr, 3> dual, std::string label);

  const std::vector<ComplementarityPair>& pairs() const { return pairs_; }
  const std::vector<ConeComplementarity>& cones() const { return cones_; }

  /// Every registered expression must reference variables of the layout.
  void validate() const;

 private:
  NlpProblem nlp_;
  std::vector<ComplementarityPair> pairs_;
  std::vector<ConeComplementarity> cones_;
  std::vector<std::string> labels_;
};

struct RelaxationSchedule {
  double rho0 = 1.0;
  double shrink = 0.1;
  double rho_min = 1e-8;
  /// Final complementarity residual (min-form / inner product) required.
  double accept_residual = 1e-6;
  /// Fix the identified active side of every pair and re-solve once at the end.
  bool polish = true;
  NlpSettings stage;

  void validate() const;
};

struct ComplementarityResidual {
  double min_form = 0.0;  // max_j |min(lhs_j, rhs_j)| and cone |<p, d>|
  double product = 0.0;   // max_j lhs_j * rhs_j (the relaxed quantity)
  double sign = 0.0;      // max violation of lhs, rhs >= 0 and cone membership
};

ComplementarityResidual complementarity_residual(const MpecProblem& problem,
                                                 const std::vector<double>& x);

struct StageRecord {
  double rho = 0.0;
  int start = -1;  // index of the start that won this stage (-1: warm start)
  NlpStatus status = NlpStatus::NumericalFailure;
  int iterations = 0;
  double objective = 0.0;
  KktResidual nlp_residual;
  ComplementarityResidual complementarity;
  bool polish = false;
};

struct MpecResult {
  /// Solution restricted to the MPEC decision vector (auxiliary variables removed).
  NlpSolution solution;
  std::vector<StageRecord> trace;
  ComplementarityResidual complementarity;
};

class MpecError : public std::runtime_error {
 public:
  enum class Kind { StageFailure, NonConvergence };
  MpecError(Kind k, const std::string& what, std::vector<StageRecord> trace,
            std::vector<double> last)
      : std::runtime_error(what), kind(k), trace(std::move(trace)), last_iterate(std::move(last)) {}
  Kind kind;
  std::vector<StageRecord> trace;
  std::vector<double> last_iterate;
};

/// Relaxed NLP for a given rho: lhs, rhs >= 0, lhs * rhs <= rho (per pair),
/// cone memberships and <p, d> <= rho (per cone). Auxiliary variables are
/// appended after the MPEC variables.
NlpProblem relax(const MpecProblem& problem, double rho);

/// Scholtes global relaxation: solve relax(problem, rho_k) for
/// rho_k = rho0 * shrink^k down to rho_min, warm-starting each stage from the
/// previous one. The first stage is solved from every start and the best
/// successful objective wins.
MpecResult scholtes_solve(const MpecProblem& problem, const RelaxationSchedule& schedule,
                          const std::vector<std::vector<double>>& starts);

}  // namespace dergame
