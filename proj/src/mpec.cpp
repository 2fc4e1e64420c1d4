#include "dergame/mpec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dergame {

void MpecProblem::add_pair(QuadExpr lhs, QuadExpr rhs, std::string label) {
  if (std::find(labels_.begin(), labels_.end(), label) != labels_.end())
    throw std::invalid_argument("complementarity pair registered twice: " + label);
  labels_.push_back(label);
  pairs_.push_back({std::move(lhs.compact()), std::move(rhs.compact()), std::move(label)});
}

void MpecProblem::add_cone(std::array<QuadExpr, 3> primal, std::array<QuadExpr, 3> dual,
                           std::string label) {
  if (std::find(labels_.begin(), labels_.end(), label) != labels_.end())
    throw std::invalid_argument("cone complementarity registered twice: " + label);
  labels_.push_back(label);
  cones_.push_back({std::move(primal), std::move(dual), std::move(label)});
}

void MpecProblem::validate() const {
  nlp_.validate();
  const VarId n = nlp_.num_vars();
  for (const auto& p : pairs_)
    if (p.lhs.max_var() >= n || p.rhs.max_var() >= n)
      throw std::invalid_argument("pair '" + p.label + "' references unknown variable");
  for (const auto& c : cones_)
    for (int k = 0; k < 3; ++k)
      if (c.primal[k].max_var() >= n || c.dual[k].max_var() >= n)
        throw std::invalid_argument("cone '" + c.label + "' references unknown variable");
}

void RelaxationSchedule::validate() const {
  if (!(rho0 > rho_min && rho_min > 0.0)) throw std::invalid_argument("need rho0 > rho_min > 0");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("need 0 < shrink < 1");
}

ComplementarityResidual complementarity_residual(const MpecProblem& problem,
                                                 const std::vector<double>& x) {
  ComplementarityResidual r;
  for (const auto& p : problem.pairs()) {
    const double a = p.lhs.value(x), b = p.rhs.value(x);
    r.min_form = std::max(r.min_form, std::fabs(std::min(a, b)));
    r.product = std::max(r.product, a * b);
    r.sign = std::max({r.sign, -a, -b});
  }
  for (const auto& c : problem.cones()) {
    double p[3], d[3];
    for (int k = 0; k < 3; ++k) {
      p[k] = c.primal[k].value(x);
      d[k] = c.dual[k].value(x);
    }
    const double inner = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
    r.min_form = std::max(r.min_form, std::fabs(inner));
    r.product = std::max(r.product, inner);
    r.sign = std::max({r.sign, std::hypot(p[1], p[2]) - p[0], std::hypot(d[1], d[2]) - d[0]});
  }
  return r;
}

namespace {

struct RelaxedBuild {
  NlpProblem nlp;
  int base_vars = 0;
  // Per pair: side expressions in terms of relaxed variables (single vars).
  std::vector<std::array<VarId, 2>> pair_vars;
  std::vector<std::size_t> pair_rows;  // rho - a*b >= 0
  std::vector<std::array<VarId, 3>> cone_p, cone_d;
  std::vector<std::array<std::size_t, 3>> cone_rows;  // primal cone, dual cone, inner product
  // Auxiliary variable definitions: aux = expr.
  std::vector<std::pair<VarId, QuadExpr>> aux;
};

VarId side_var(RelaxedBuild& b, const QuadExpr& e, const std::string& name, bool nonneg) {
  VarId v;
  if (e.is_single_var(&v)) {
    if (nonneg && b.nlp.lower()[v] < 0.0) b.nlp.add_geq(QuadExpr::var(v), name + ">=0");
    return v;
  }
  VarId a = b.nlp.add_var(name, nonneg ? 0.0 : -kInf, kInf);
  b.nlp.add_eq(QuadExpr::var(a) - e, name + "=def");
  b.aux.emplace_back(a, e);
  return a;
}

RelaxedBuild build_relaxed(const MpecProblem& mp, double rho) {
  RelaxedBuild b;
  b.nlp = mp.nlp();
  b.base_vars = mp.nlp().num_vars();
  for (const auto& p : mp.pairs()) {
    VarId a = side_var(b, p.lhs, "cp(" + p.label + ").lhs", true);
    VarId c = side_var(b, p.rhs, "cp(" + p.label + ").rhs", true);
    b.pair_vars.push_back({a, c});
    b.pair_rows.push_back(
        b.nlp.add_geq(QuadExpr(rho) - QuadExpr::var(a) * QuadExpr::var(c), "relax(" + p.label + ")"));
  }
  for (const auto& cn : mp.cones()) {
    std::array<VarId, 3> pv, dv;
    for (int k = 0; k < 3; ++k) {
      pv[k] = side_var(b, cn.primal[k], "cone(" + cn.label + ").p" + std::to_string(k), k == 0);
      dv[k] = side_var(b, cn.dual[k], "cone(" + cn.label + ").d" + std::to_string(k), k == 0);
    }
    auto sq = [](VarId v) { return QuadExpr::var(v) * QuadExpr::var(v); };
    std::array<std::size_t, 3> rows;
    rows[0] = b.nlp.add_geq(sq(pv[0]) - sq(pv[1]) - sq(pv[2]), "K(" + cn.label + ")");
    rows[1] = b.nlp.add_geq(sq(dv[0]) - sq(dv[1]) - sq(dv[2]), "K*(" + cn.label + ")");
    QuadExpr inner(rho);
    for (int k = 0; k < 3; ++k) inner -= QuadExpr::var(pv[k]) * QuadExpr::var(dv[k]);
    rows[2] = b.nlp.add_geq(inner, "relax(" + cn.label + ")");
    b.cone_p.push_back(pv);
    b.cone_d.push_back(dv);
    b.cone_rows.push_back(rows);
  }
  return b;
}

void set_rho(RelaxedBuild& b, double rho) {
  auto reset = [&](std::size_t row) {
    auto& e = b.nlp.constraints()[row].expr;
    e.add_constant(rho - e.constant());
  };
  for (auto r : b.pair_rows) reset(r);
  for (const auto& r : b.cone_rows) reset(r[2]);
}

std::vector<double> extend_start(const RelaxedBuild& b, const std::vector<double>& base) {
  std::vector<double> x = base;
  x.resize(b.nlp.num_vars(), 0.0);
  for (const auto& [v, e] : b.aux) {
    double val = e.value(x);
    if (b.nlp.lower()[v] >= 0.0) val = std::max(val, 0.0);
    x[v] = val;
  }
  return x;
}

// Pulls the smaller side of every pair violating a*b <= rho (ties: rhs) down
// so the product meets the bound. Breaks symmetric iterates that Newton steps
// cannot leave.
std::vector<double> split_start(const RelaxedBuild& b, std::vector<double> x, double rho) {
  for (const auto& [a, c] : b.pair_vars) {
    if (x[a] * x[c] <= rho) continue;
    const VarId small = x[a] < x[c] ? a : c;
    const VarId large = small == a ? c : a;
    x[small] = 0.5 * rho / std::max(x[large], 1e-12);
  }
  return x;
}

bool better(Sense s, double a, double b) { return s == Sense::Maximize ? a > b : a < b; }

// Pairs whose sides are within three orders of magnitude of each other: the
// zero side is not identified and the polish tries both.
std::vector<std::size_t> ambiguous_pairs(const RelaxedBuild& b, const std::vector<double>& x) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < b.pair_vars.size(); ++j) {
    const double lo = std::min(x[b.pair_vars[j][0]], x[b.pair_vars[j][1]]);
    const double hi = std::max(x[b.pair_vars[j][0]], x[b.pair_vars[j][1]]);
    if (lo > 0.0 && hi < 1e3 * lo) out.push_back(j);
  }
  return out;
}

// Active-set polish: fix the identified zero side of every pair (the larger
// side where `flip` is set) and re-solve.
NlpProblem polish_problem(const RelaxedBuild& b, const std::vector<double>& x, const std::vector<bool>& flip) {
  NlpProblem p = b.nlp;
  auto& rows = p.constraints();
  std::vector<bool> drop(rows.size(), false);
  // Fixing through the bounds keeps the variable off its barrier boundary.
  auto fix_zero = [&](VarId v, const std::string&) {
    p.lower()[v] = 0.0;
    p.upper()[v] = 0.0;
  };
  for (std::size_t j = 0; j < b.pair_vars.size(); ++j) {
    auto [a, c] = b.pair_vars[j];
    drop[b.pair_rows[j]] = true;
    if ((x[a] <= x[c]) != flip[j]) fix_zero(a, "polish.lhs" + std::to_string(j));
    else fix_zero(c, "polish.rhs" + std::to_string(j));
  }
  for (std::size_t j = 0; j < b.cone_p.size(); ++j) {
    const auto& pv = b.cone_p[j];
    const auto& dv = b.cone_d[j];
    const double gp = x[pv[0]] - std::hypot(x[pv[1]], x[pv[2]]);
    const double gd = x[dv[0]] - std::hypot(x[dv[1]], x[dv[2]]);
    drop[b.cone_rows[j][2]] = true;
    const std::string tag = "polish.cone" + std::to_string(j);
    if (x[dv[0]] <= gp) {
      for (int k = 0; k < 3; ++k) fix_zero(dv[k], tag + ".d" + std::to_string(k));
      drop[b.cone_rows[j][1]] = true;
    } else if (x[pv[0]] <= gd) {
      for (int k = 0; k < 3; ++k) fix_zero(pv[k], tag + ".p" + std::to_string(k));
      drop[b.cone_rows[j][0]] = true;
    } else {
      // Both on the boundary: d = (d0/p0) * (p0, -p1, -p2).
      auto V = [](VarId v) { return QuadExpr::var(v); };
      p.add_eq(V(pv[0]) * V(dv[1]) + V(dv[0]) * V(pv[1]), tag + ".b1");
      p.add_eq(V(pv[0]) * V(dv[2]) + V(dv[0]) * V(pv[2]), tag + ".b2");
      p.add_eq(V(pv[0]) * V(pv[0]) - V(pv[1]) * V(pv[1]) - V(pv[2]) * V(pv[2]), tag + ".bp");
      drop[b.cone_rows[j][0]] = true;
      drop[b.cone_rows[j][1]] = true;
    }
  }
  std::vector<Constraint> kept;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (k >= drop.size() || !drop[k]) kept.push_back(std::move(rows[k]));
  rows = std::move(kept);
  return p;
}

}  // namespace

NlpProblem relax(const MpecProblem& problem, double rho) {
  return build_relaxed(problem, rho).nlp;
}

MpecResult scholtes_solve(const MpecProblem& problem, const RelaxationSchedule& schedule,
                          const std::vector<std::vector<double>>& starts) {
  schedule.validate();
  problem.validate();
  if (starts.empty()) throw std::invalid_argument("scholtes_solve: no start points");
  const int n = problem.nlp().num_vars();
  for (const auto& s : starts)
    if (static_cast<int>(s.size()) != n) throw std::invalid_argument("start point has wrong size");

  const Sense sense = problem.nlp().sense();
  const bool has_comp = !problem.pairs().empty() || !problem.cones().empty();
  RelaxedBuild b = build_relaxed(problem, schedule.rho0);

  MpecResult result;
  std::vector<double> current;
  NlpSolution best;
  auto restrict = [&](NlpSolution s) {
    s.x.resize(n);
    s.multipliers.resize(problem.nlp().num_constraints());
    return s;
  };

  double rho = schedule.rho0;
  for (int stage = 0;; ++stage) {
    set_rho(b, rho);
    StageRecord rec;
    rec.rho = rho;
    bool ok = false;
    NlpSolution stage_best;
    auto consider = [&](NlpSolution s, int start_idx) {
      if (!converged(s.status)) return;
      if (!ok || better(sense, s.objective, stage_best.objective)) {
        stage_best = std::move(s);
        rec.start = start_idx;
        ok = true;
      }
    };
    if (stage == 0) {
      for (std::size_t k = 0; k < starts.size(); ++k) {
        b.nlp.start() = extend_start(b, starts[k]);
        consider(solve(b.nlp, schedule.stage), static_cast<int>(k));
      }
    } else {
      b.nlp.start() = current;
      NlpSettings warm = schedule.stage;
      warm.mu_init = std::min(warm.mu_init, std::max(1e-7, 1e-2 * rho));
      warm.bound_push = 1e-6;
      warm.warm_multipliers = best.multipliers;
      consider(solve(b.nlp, warm), -1);
      if (!ok) {
        warm.warm_multipliers.clear();
        warm.mu_init = std::min(schedule.stage.mu_init, std::max(1e-6, rho));
        warm.bound_push = schedule.stage.bound_push;
        b.nlp.start() = split_start(b, current, rho);
        consider(solve(b.nlp, warm), -1);
      }
      if (!ok) {
        for (std::size_t k = 0; k < starts.size(); ++k) {
          b.nlp.start() = extend_start(b, starts[k]);
          consider(solve(b.nlp, schedule.stage), static_cast<int>(k));
        }
      }
    }
    if (!ok && stage > 0 && has_comp && schedule.polish) {
      // Late stages can stall on pairs where both sides vanish; the polish
      // below finishes from the last solved stage and the residual test
      // decides acceptance.
      rec.status = NlpStatus::NumericalFailure;
      result.trace.push_back(rec);
      break;
    }
    if (!ok) {
      rec.status = NlpStatus::NumericalFailure;
      result.trace.push_back(rec);
      std::ostringstream os;
      os << "relaxation stage " << stage << " (rho=" << rho << ") failed on all starts";
      throw MpecError(MpecError::Kind::StageFailure, os.str(), result.trace, current);
    }
    current = stage_best.x;
    rec.status = stage_best.status;
    rec.iterations = stage_best.iterations;
    rec.objective = stage_best.objective;
    rec.nlp_residual = stage_best.residual;
    std::vector<double> base(current.begin(), current.begin() + n);
    rec.complementarity = complementarity_residual(problem, base);
    result.trace.push_back(rec);
    best = std::move(stage_best);
    if (!has_comp || rho <= schedule.rho_min * (1.0 + 1e-12)) break;
    rho = std::max(rho * schedule.shrink, schedule.rho_min);
  }

  if (has_comp && schedule.polish) {
    const ComplementarityResidual before =
        complementarity_residual(problem, std::vector<double>(current.begin(), current.begin() + n));
    // Default identification first, then all ambiguous pairs flipped, then
    // each one flipped alone.
    const auto amb = ambiguous_pairs(b, current);
    std::vector<std::vector<bool>> flips(1, std::vector<bool>(b.pair_vars.size(), false));
    if (!amb.empty()) {
      auto all = flips[0];
      for (auto j : amb) all[j] = true;
      flips.push_back(all);
      if (amb.size() > 1)
        for (auto j : amb) {
          auto one = flips[0];
          one[j] = true;
          flips.push_back(one);
        }
    }
    const double slack = 1e-3 * std::max(1.0, std::fabs(best.objective));
    const double base_obj = best.objective;
    bool polished = false;
    for (const auto& flip : flips) {
      NlpProblem pol = polish_problem(b, current, flip);
      pol.start() = current;
      NlpSettings ps = schedule.stage;
      ps.mu_init = 1e-6;
      ps.max_iter = std::min(ps.max_iter, 500);
      NlpSolution s = solve(pol, ps);
      StageRecord rec;
      rec.rho = 0.0;
      rec.polish = true;
      rec.status = s.status;
      rec.iterations = s.iterations;
      rec.objective = s.objective;
      rec.nlp_residual = s.residual;
      if (converged(s.status)) {
        std::vector<double> base(s.x.begin(), s.x.begin() + n);
        rec.complementarity = complementarity_residual(problem, base);
        // The relaxed objective overshoots by O(rho * multipliers); a larger
        // loss means the active set was misidentified.
        const bool worse = sense == Sense::Maximize ? s.objective < base_obj - slack
                                                    : s.objective > base_obj + slack;
        const bool improves = !polished || better(sense, s.objective, best.objective);
        if (!worse && rec.complementarity.min_form <= before.min_form && improves) {
          // Multipliers of the polished problem do not map onto the relaxed rows.
          s.multipliers.assign(b.nlp.num_constraints(), 0.0);
          best = std::move(s);
          polished = true;
        }
      }
      result.trace.push_back(rec);
      if (polished && rec.complementarity.min_form <= schedule.accept_residual) break;
    }
    if (polished) current = best.x;
  }

  std::vector<double> base(current.begin(), current.begin() + n);
  result.complementarity = complementarity_residual(problem, base);
  result.solution = restrict(best);
  if (has_comp && result.complementarity.min_form > schedule.accept_residual) {
    std::ostringstream os;
    os << "complementarity residual " << result.complementarity.min_form << " above "
       << schedule.accept_residual;
    throw MpecError(MpecError::Kind::NonConvergence, os.str(), result.trace, base);
  }
  return result;
}

}  // namespace dergame
