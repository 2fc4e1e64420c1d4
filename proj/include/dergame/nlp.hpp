#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dergame/expr.hpp"

namespace dergame {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class ConstraintKind { Equal, GreaterEqual };

struct Constraint {
  QuadExpr expr;  // expr == 0  or  expr >= 0
  ConstraintKind kind = ConstraintKind::Equal;
  std::string label;
};

/// A smooth NLP whose objective and constraints are quadratic expressions
/// over a named decision vector.
class NlpProblem {
 public:
  VarId add_var(std::string name, double lower = -kInf, double upper = kInf, double start = 0.0);
  /// Reserves a contiguous block of variables named `block[k]`.
  VarId add_block(const std::string& block, int size, double lower = -kInf, double upper = kInf,
                  double start = 0.0);

  std::size_t add_eq(QuadExpr e, std::string label = {});
  std::size_t add_geq(QuadExpr e, std::string label = {});

  int num_vars() const { return static_cast<int>(names_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }

  const std::vector<std::string>& names() const { return names_; }
  std::vector<double>& lower() { return lower_; }
  std::vector<double>& upper() { return upper_; }
  std::vector<double>& start() { return start_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& start() const { return start_; }

  std::vector<Constraint>& constraints() { return constraints_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  QuadExpr& objective() { return objective_; }
  const QuadExpr& objective() const { return objective_; }
  Sense sense() const { return sense_; }
  void set_objective(QuadExpr obj, Sense s) {
    objective_ = std::move(obj);
    sense_ = s;
  }

  /// (offset, size) of a named block.
  std::pair<VarId, int> block(const std::string& name) const;
  bool has_block(const std::string& name) const { return blocks_.count(name) > 0; }

  /// Throws std::invalid_argument on out-of-range indices, inverted bounds or
  /// a start point outside the bounds.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> lower_, upper_, start_;
  std::map<std::string, std::pair<VarId, int>> blocks_;
  std::vector<Constraint> constraints_;
  QuadExpr objective_;
  Sense sense_ = Sense::Minimize;
};

/// Acceptable: the error stayed below acceptable_tol for acceptable_iter
/// consecutive iterations without reaching tol.
enum class NlpStatus { Optimal, Acceptable, Infeasible, IterationLimit, NumericalFailure };
const char* to_string(NlpStatus s);
inline bool converged(NlpStatus s) { return s == NlpStatus::Optimal || s == NlpStatus::Acceptable; }

struct NlpSettings {
  double tol = 1e-8;
  double acceptable_tol = 1e-6;
  int acceptable_iter = 10;
  int max_iter = 3000;
  double mu_init = 0.1;
  /// Bounds are relaxed by this relative amount before solving.
  double bound_relax = 1e-10;
  /// Relative distance the start is pushed inside its bounds.
  double bound_push = 1e-2;
  /// Constraint multipliers of a previous solve (same convention as
  /// NlpSolution::multipliers). Bound multipliers then start at mu / slack.
  std::vector<double> warm_multipliers;
  std::ostream* log = nullptr;  // per-iteration residual stream
};

struct KktResidual {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double max() const;
};

struct NlpSolution {
  std::vector<double> x;
  /// One multiplier per constraint. For `>=` rows the multiplier is >= 0 and
  /// the Lagrangian is f -/+ y^T c depending on the sense (min: f - y^T c,
  /// max: f + y^T c), so the sign is uniform across senses.
  std::vector<double> multipliers;
  double objective = 0.0;
  KktResidual residual;
  NlpStatus status = NlpStatus::NumericalFailure;
  int iterations = 0;
  std::string message;
};

/// Primal-dual interior-point method (barrier, Newton steps on the
/// regularized KKT system with inertia correction, filter line search).
/// Returns local solutions for nonconvex problems.
NlpSolution solve(const NlpProblem& problem, const NlpSettings& settings = {});

/// Unscaled first-order residuals of `problem` at (x, multipliers).
KktResidual evaluate_kkt(const NlpProblem& problem, const std::vector<double>& x,
                         const std::vector<double>& multipliers);

struct DerivativeCheck {
  double max_rel_error = 0.0;
  std::string worst;  // "objective" or constraint label/index
};

/// Compares analytic gradients/Jacobian rows against central finite
/// differences at `x`. Relative error uses max(1, |analytic|) as the scale.
DerivativeCheck check_derivatives(const NlpProblem& problem, const std::vector<double>& x,
                                  double step = 1e-6);

}  // namespace dergame
