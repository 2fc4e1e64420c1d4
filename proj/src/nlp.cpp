#include "dergame/nlp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace dergame {

VarId NlpProblem::add_var(std::string name, double lower, double upper, double start) {
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  start_.push_back(start);
  return static_cast<VarId>(names_.size() - 1);
}

VarId NlpProblem::add_block(const std::string& block, int size, double lower, double upper,
                            double start) {
  if (blocks_.count(block)) throw std::invalid_argument("duplicate variable block: " + block);
  VarId first = num_vars();
  for (int k = 0; k < size; ++k)
    add_var(block + "[" + std::to_string(k) + "]", lower, upper, start);
  blocks_[block] = {first, size};
  return first;
}

std::size_t NlpProblem::add_eq(QuadExpr e, std::string label) {
  constraints_.push_back({std::move(e.compact()), ConstraintKind::Equal, std::move(label)});
  return constraints_.size() - 1;
}

std::size_t NlpProblem::add_geq(QuadExpr e, std::string label) {
  constraints_.push_back({std::move(e.compact()), ConstraintKind::GreaterEqual, std::move(label)});
  return constraints_.size() - 1;
}

std::pair<VarId, int> NlpProblem::block(const std::string& name) const {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) throw std::out_of_range("unknown variable block: " + name);
  return it->second;
}

void NlpProblem::validate() const {
  const VarId n = num_vars();
  for (VarId v = 0; v < n; ++v) {
    if (!(lower_[v] <= upper_[v]))
      throw std::invalid_argument("inverted bounds on " + names_[v]);
    if (!std::isfinite(start_[v]))
      throw std::invalid_argument("non-finite start value for " + names_[v]);
  }
  if (objective_.max_var() >= n) throw std::invalid_argument("objective references unknown variable");
  for (const auto& c : constraints_)
    if (c.expr.max_var() >= n)
      throw std::invalid_argument("constraint '" + c.label + "' references unknown variable");
}

const char* to_string(NlpStatus s) {
  switch (s) {
    case NlpStatus::Optimal: return "Optimal";
    case NlpStatus::Acceptable: return "Acceptable";
    case NlpStatus::Infeasible: return "Infeasible";
    case NlpStatus::IterationLimit: return "IterationLimit";
    case NlpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

double KktResidual::max() const { return std::max({stationarity, feasibility, complementarity}); }

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Precompiled row: value/gradient evaluation with fixed sparsity.
struct CompiledRow {
  QuadExpr expr;
  double scale = 1.0;
  bool inequality = false;
  int slack = -1;                        // index in z for inequality rows
  std::vector<int> vars;                 // unique, sorted
  std::vector<int> lin_pos;              // per linear term -> position in vars
  std::vector<std::pair<int, int>> quad_pos;  // per quad term -> positions of i, j
  std::vector<int> hess_pos;             // per quad term -> Hessian entry index
};

class InteriorPoint {
 public:
  InteriorPoint(const NlpProblem& p, const NlpSettings& s) : prob_(p), set_(s) { compile(); }

  NlpSolution run();

 private:
  void compile();
  void compile_row(CompiledRow& r);
  double objective(const Vec& z) const;
  void objective_gradient(const Vec& z, Vec& g) const;
  void constraints(const Vec& z, Vec& h) const;
  void jacobian(const Vec& z, std::vector<double>& jv) const;
  void hessian(const Vec& y, std::vector<double>& hv) const;
  double barrier(const Vec& z, double mu) const;
  bool factor(const std::vector<double>& jv, const std::vector<double>& hv, const Vec& sigma,
              double& dw, double& dc);

  const NlpProblem& prob_;
  NlpSettings set_;

  int n_ = 0;   // original variables
  int mi_ = 0;  // inequality rows (one slack each)
  int N_ = 0;   // n + mi
  int M_ = 0;   // rows
  double obj_scale_ = 1.0;
  double sense_ = 1.0;
  QuadExpr obj_;
  std::vector<int> obj_lin_var_;
  std::vector<std::pair<int, int>> obj_quad_;
  std::vector<int> obj_hess_pos_;
  std::vector<CompiledRow> rows_;
  std::vector<int> row_origin_;  // internal row -> problem constraint (-1 for fixed-var rows)
  Vec lo_, hi_;
  std::vector<int> has_lo_, has_hi_;

  // Hessian lower-triangle entries over x.
  std::vector<std::pair<int, int>> hess_entries_;
  // Jacobian entries (row, col) in fill order.
  std::vector<std::pair<int, int>> jac_entries_;
  std::vector<int> row_jac_offset_;

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  double last_dw_ = 0.0;
  std::vector<Eigen::Triplet<double>> trip_;
  // Matrix the Newton steps are refined against (lower triangle); empty when
  // the factorized matrix itself is the target.
  SpMat refine_target_;
  bool refine_ = false;
  Vec solve_kkt(const Vec& rhs) const;
};

void InteriorPoint::compile_row(CompiledRow& r) {
  std::vector<int> vs;
  for (const auto& t : r.expr.linear()) vs.push_back(t.var);
  for (const auto& t : r.expr.quadratic()) {
    vs.push_back(t.i);
    vs.push_back(t.j);
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  r.vars = vs;
  auto pos = [&](int v) {
    return static_cast<int>(std::lower_bound(vs.begin(), vs.end(), v) - vs.begin());
  };
  for (const auto& t : r.expr.linear()) r.lin_pos.push_back(pos(t.var));
  for (const auto& t : r.expr.quadratic()) r.quad_pos.emplace_back(pos(t.i), pos(t.j));
}

void InteriorPoint::compile() {
  prob_.validate();
  n_ = prob_.num_vars();
  sense_ = prob_.sense() == Sense::Minimize ? 1.0 : -1.0;
  obj_ = prob_.objective();
  obj_.compact();

  std::vector<CompiledRow> eq, in;
  std::vector<int> eq_origin, in_origin;
  for (int k = 0; k < prob_.num_constraints(); ++k) {
    const auto& c = prob_.constraints()[k];
    CompiledRow r;
    r.expr = c.expr;
    r.expr.compact();
    r.inequality = c.kind == ConstraintKind::GreaterEqual;
    (r.inequality ? in : eq).push_back(std::move(r));
    (c.kind == ConstraintKind::GreaterEqual ? in_origin : eq_origin).push_back(k);
  }

  lo_.resize(n_);
  hi_.resize(n_);
  for (int v = 0; v < n_; ++v) {
    double l = prob_.lower()[v], u = prob_.upper()[v];
    if (std::isfinite(l) && std::isfinite(u) && u - l <= 1e-12 * std::max(1.0, std::fabs(l))) {
      // Fixed variable: free it and pin with an equality row.
      CompiledRow r;
      r.expr = QuadExpr::var(v) - QuadExpr(0.5 * (l + u));
      eq.push_back(std::move(r));
      eq_origin.push_back(-1);
      l = -kInf;
      u = kInf;
    }
    const double relax = set_.bound_relax;
    if (std::isfinite(l)) l -= relax * std::max(1.0, std::fabs(l));
    if (std::isfinite(u)) u += relax * std::max(1.0, std::fabs(u));
    lo_[v] = l;
    hi_[v] = u;
  }

  mi_ = static_cast<int>(in.size());
  N_ = n_ + mi_;
  M_ = static_cast<int>(eq.size() + in.size());
  lo_.conservativeResize(N_);
  hi_.conservativeResize(N_);
  for (int k = 0; k < mi_; ++k) {
    lo_[n_ + k] = -set_.bound_relax;
    hi_[n_ + k] = kInf;
  }
  has_lo_.assign(N_, 0);
  has_hi_.assign(N_, 0);
  for (int v = 0; v < N_; ++v) {
    has_lo_[v] = std::isfinite(lo_[v]);
    has_hi_[v] = std::isfinite(hi_[v]);
  }

  rows_ = std::move(eq);
  row_origin_ = eq_origin;
  for (int k = 0; k < mi_; ++k) {
    in[k].slack = n_ + k;
    rows_.push_back(std::move(in[k]));
    row_origin_.push_back(in_origin[k]);
  }
  for (auto& r : rows_) compile_row(r);

  // Hessian structure.
  std::map<std::pair<int, int>, int> hidx;
  auto hpos = [&](int i, int j) {
    if (i < j) std::swap(i, j);
    auto [it, inserted] = hidx.try_emplace({i, j}, static_cast<int>(hess_entries_.size()));
    if (inserted) hess_entries_.emplace_back(i, j);
    return it->second;
  };
  for (const auto& t : obj_.quadratic()) obj_hess_pos_.push_back(hpos(t.i, t.j));
  for (auto& r : rows_)
    for (const auto& t : r.expr.quadratic()) r.hess_pos.push_back(hpos(t.i, t.j));

  // Jacobian structure.
  for (int k = 0; k < M_; ++k) {
    row_jac_offset_.push_back(static_cast<int>(jac_entries_.size()));
    for (int v : rows_[k].vars) jac_entries_.emplace_back(k, v);
    if (rows_[k].slack >= 0) jac_entries_.emplace_back(k, rows_[k].slack);
  }
  row_jac_offset_.push_back(static_cast<int>(jac_entries_.size()));
}

double InteriorPoint::objective(const Vec& z) const {
  return obj_scale_ * sense_ * obj_.value(std::span<const double>(z.data(), n_));
}

void InteriorPoint::objective_gradient(const Vec& z, Vec& g) const {
  g.setZero(N_);
  obj_.add_gradient(std::span<const double>(z.data(), n_), obj_scale_ * sense_,
                    std::span<double>(g.data(), n_));
}

void InteriorPoint::constraints(const Vec& z, Vec& h) const {
  h.resize(M_);
  std::span<const double> x(z.data(), n_);
  for (int k = 0; k < M_; ++k) {
    double v = rows_[k].scale * rows_[k].expr.value(x);
    if (rows_[k].slack >= 0) v -= z[rows_[k].slack];
    h[k] = v;
  }
}

void InteriorPoint::jacobian(const Vec& z, std::vector<double>& jv) const {
  jv.assign(jac_entries_.size(), 0.0);
  for (int k = 0; k < M_; ++k) {
    const auto& r = rows_[k];
    double* out = jv.data() + row_jac_offset_[k];
    const auto& lin = r.expr.linear();
    for (std::size_t a = 0; a < lin.size(); ++a) out[r.lin_pos[a]] += r.scale * lin[a].coef;
    const auto& q = r.expr.quadratic();
    for (std::size_t a = 0; a < q.size(); ++a) {
      out[r.quad_pos[a].first] += r.scale * q[a].coef * z[q[a].j];
      out[r.quad_pos[a].second] += r.scale * q[a].coef * z[q[a].i];
    }
    if (r.slack >= 0) out[r.vars.size()] = -1.0;
  }
}

void InteriorPoint::hessian(const Vec& y, std::vector<double>& hv) const {
  hv.assign(hess_entries_.size(), 0.0);
  const auto& oq = obj_.quadratic();
  for (std::size_t a = 0; a < oq.size(); ++a) {
    double c = obj_scale_ * sense_ * oq[a].coef;
    hv[obj_hess_pos_[a]] += (oq[a].i == oq[a].j) ? 2.0 * c : c;
  }
  for (int k = 0; k < M_; ++k) {
    const auto& r = rows_[k];
    const auto& q = r.expr.quadratic();
    for (std::size_t a = 0; a < q.size(); ++a) {
      double c = y[k] * r.scale * q[a].coef;
      hv[r.hess_pos[a]] += (q[a].i == q[a].j) ? 2.0 * c : c;
    }
  }
}

double InteriorPoint::barrier(const Vec& z, double mu) const {
  double b = 0.0;
  for (int v = 0; v < N_; ++v) {
    if (has_lo_[v]) b -= std::log(z[v] - lo_[v]);
    if (has_hi_[v]) b -= std::log(hi_[v] - z[v]);
  }
  return mu * b;
}

constexpr double kShiftFloor = 1e-8;

bool InteriorPoint::factor(const std::vector<double>& jv, const std::vector<double>& hv,
                           const Vec& sigma, double& dw, double& dc) {
  const int dim = N_ + M_;
  auto assemble_and_factor = [&](double w, double c) {
    trip_.clear();
    trip_.reserve(dim + hv.size() + jv.size());
    for (int v = 0; v < N_; ++v) trip_.emplace_back(v, v, sigma[v] + w);
    for (std::size_t a = 0; a < hv.size(); ++a)
      trip_.emplace_back(hess_entries_[a].first, hess_entries_[a].second, hv[a]);
    for (std::size_t a = 0; a < jv.size(); ++a)
      trip_.emplace_back(N_ + jac_entries_[a].first, jac_entries_[a].second, jv[a]);
    for (int k = 0; k < M_; ++k) trip_.emplace_back(N_ + k, N_ + k, -c);
    SpMat K(dim, dim);
    K.setFromTriplets(trip_.begin(), trip_.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(K);
      analyzed_ = true;
    }
    ldlt_.factorize(K);
    if (ldlt_.info() != Eigen::Success) return std::make_pair(false, true);
    const auto& D = ldlt_.vectorD();
    int pos = 0, neg = 0, zero = 0;
    // Absolute threshold: with dc > 0 the constraint pivots stay near -dc even
    // when dw is huge, so a relative test would misclassify them.
    for (int i = 0; i < dim; ++i) {
      if (std::fabs(D[i]) <= 1e-20) ++zero;
      else if (D[i] > 0) ++pos;
      else ++neg;
    }
    bool ok = zero == 0 && pos == N_ && neg == M_;
    bool singular = zero > 0 || neg < M_;
    return std::make_pair(ok, singular);
  };

  // Refinement target: the system with the constraint regularization (and a
  // pure stability shift of the primal block) removed.
  auto set_target = [&](double w) {
    SpMat target(dim, dim);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(trip_.size());
    for (const auto& e : trip_) {
      if (e.row() >= N_ && e.row() == e.col()) continue;
      double v = e.value();
      if (e.row() == e.col() && e.row() < N_) v -= w;
      t.emplace_back(e.row(), e.col(), v);
    }
    target.setFromTriplets(t.begin(), t.end());
    refine_target_ = std::move(target);
    refine_ = true;
  };

  refine_ = false;
  dw = 0.0;
  dc = 0.0;
  auto [ok, singular] = assemble_and_factor(dw, dc);
  if (ok) return true;
  if (singular) {
    // Zero pivots from free variables without curvature, or from the pivot
    // order: a small shift keeps the factorization stable and refinement
    // recovers the step of the unshifted system.
    dw = kShiftFloor;
    std::tie(ok, singular) = assemble_and_factor(dw, dc);
    if (ok) {
      set_target(dw);
      return true;
    }
    dw = 0.0;
    dc = 1e-8;
    std::tie(ok, singular) = assemble_and_factor(dw, dc);
    if (ok) {
      set_target(0.0);
      return true;
    }
  }
  dw = last_dw_ == 0.0 ? 1e-4 : std::max(kShiftFloor, last_dw_ / 3.0);
  for (int attempt = 0; attempt < 60; ++attempt) {
    std::tie(ok, singular) = assemble_and_factor(dw, dc);
    if (ok) {
      last_dw_ = dw;
      // A shift at the floor is a stability shift, not a curvature correction.
      if (dc > 0.0 || dw <= kShiftFloor) set_target(dw <= kShiftFloor ? dw : 0.0);
      return true;
    }
    if (singular && dc == 0.0) dc = 1e-8;
    dw *= (last_dw_ == 0.0 ? 100.0 : 8.0);
    if (dw > 1e40) break;
  }
  return false;
}

Vec InteriorPoint::solve_kkt(const Vec& rhs) const {
  Vec x = ldlt_.solve(rhs);
  if (!refine_ || !x.allFinite()) return x;
  auto residual = [&](const Vec& v) -> Vec { return rhs - refine_target_.selfadjointView<Eigen::Lower>() * v; };
  Vec r = residual(x);
  double rn = r.lpNorm<Eigen::Infinity>();
  const double stop = 1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  for (int it = 0; it < 10 && rn > stop; ++it) {
    Vec cand = x + ldlt_.solve(r);
    Vec rc = residual(cand);
    const double cn = rc.lpNorm<Eigen::Infinity>();
    if (!(cn < 0.5 * rn)) break;
    x = std::move(cand);
    r = std::move(rc);
    rn = cn;
  }
  return x;
}

NlpSolution InteriorPoint::run() {
  NlpSolution sol;
  Vec z(N_);
  for (int v = 0; v < n_; ++v) z[v] = prob_.start()[v];

  // Push start strictly inside bounds.
  auto push = [&](int v) {
    const double k1 = set_.bound_push, k2 = set_.bound_push;
    double l = lo_[v], u = hi_[v];
    if (has_lo_[v] && has_hi_[v]) {
      double pl = std::min(k1 * std::max(1.0, std::fabs(l)), k2 * (u - l));
      double pu = std::min(k1 * std::max(1.0, std::fabs(u)), k2 * (u - l));
      z[v] = std::clamp(z[v], l + pl, u - pu);
    } else if (has_lo_[v]) {
      z[v] = std::max(z[v], l + k1 * std::max(1.0, std::fabs(l)));
    } else if (has_hi_[v]) {
      z[v] = std::min(z[v], u - k1 * std::max(1.0, std::fabs(u)));
    }
  };
  for (int v = 0; v < n_; ++v) push(v);

  // Gradient-based scaling at the start point.
  {
    obj_scale_ = 1.0;
    Vec g;
    objective_gradient(z, g);
    double gmax = g.lpNorm<Eigen::Infinity>();
    obj_scale_ = gmax > 100.0 ? 100.0 / gmax : 1.0;
    std::vector<double> jv;
    for (auto& r : rows_) r.scale = 1.0;
    jacobian(z, jv);
    for (int k = 0; k < M_; ++k) {
      double m = 0.0;
      for (int a = row_jac_offset_[k]; a < row_jac_offset_[k + 1]; ++a)
        if (jac_entries_[a].second < n_) m = std::max(m, std::fabs(jv[a]));
      rows_[k].scale = m > 100.0 ? 100.0 / m : 1.0;
    }
  }
  {
    std::span<const double> x(z.data(), n_);
    for (const auto& r : rows_)
      if (r.slack >= 0) z[r.slack] = r.scale * r.expr.value(x);
    for (int v = n_; v < N_; ++v) push(v);
  }

  double mu = set_.mu_init;
  Vec y = Vec::Zero(M_);
  Vec zl = Vec::Zero(N_), zu = Vec::Zero(N_);
  const bool warm = static_cast<int>(set_.warm_multipliers.size()) == prob_.num_constraints();
  for (int v = 0; v < N_; ++v) {
    if (has_lo_[v]) zl[v] = warm ? mu / (z[v] - lo_[v]) : 1.0;
    if (has_hi_[v]) zu[v] = warm ? mu / (hi_[v] - z[v]) : 1.0;
  }
  if (warm)
    for (int k = 0; k < M_; ++k)
      if (row_origin_[k] >= 0) y[k] = -set_.warm_multipliers[row_origin_[k]] * obj_scale_ / rows_[k].scale;
  std::vector<std::pair<double, double>> filter;
  double theta_max = -1.0, theta_min = 0.0;
  const double tau_min = 0.99;
  Vec g(N_), h(M_), rx(N_), sigma(N_);
  std::vector<double> jv, hv;
  Vec rhs(N_ + M_), sol_vec(N_ + M_);

  auto jt_times = [&](const std::vector<double>& j, const Vec& v, Vec& out) {
    out.setZero(N_);
    for (std::size_t a = 0; a < j.size(); ++a)
      out[jac_entries_[a].second] += j[a] * v[jac_entries_[a].first];
  };
  auto j_times = [&](const std::vector<double>& j, const Vec& v, Vec& out) {
    out.setZero(M_);
    for (std::size_t a = 0; a < j.size(); ++a)
      out[jac_entries_[a].first] += j[a] * v[jac_entries_[a].second];
  };

  struct Err {
    double stat, feas, comp;
  };
  auto errors = [&](double m, const Vec& grad, const std::vector<double>& j, const Vec& hval) {
    Vec jty;
    jt_times(j, y, jty);
    Vec stat = grad + jty - zl + zu;
    double sumy = y.lpNorm<1>(), sumz = zl.lpNorm<1>() + zu.lpNorm<1>();
    int nb = 0;
    for (int v = 0; v < N_; ++v) nb += has_lo_[v] + has_hi_[v];
    const double smax = 100.0;
    double sd = std::max(smax, (sumy + sumz) / std::max(1, M_ + nb)) / smax;
    double sc = std::max(smax, sumz / std::max(1, nb)) / smax;
    double comp = 0.0;
    for (int v = 0; v < N_; ++v) {
      if (has_lo_[v]) comp = std::max(comp, std::fabs(zl[v] * (z[v] - lo_[v]) - m));
      if (has_hi_[v]) comp = std::max(comp, std::fabs(zu[v] * (hi_[v] - z[v]) - m));
    }
    return Err{stat.lpNorm<Eigen::Infinity>() / sd, M_ ? hval.lpNorm<Eigen::Infinity>() : 0.0,
               comp / sc};
  };

  int iter = 0;
  sol.status = NlpStatus::IterationLimit;
  int ls_failures = 0;
  int acceptable_count = 0;
  for (; iter <= set_.max_iter; ++iter) {
    objective_gradient(z, g);
    constraints(z, h);
    jacobian(z, jv);

    Err e0 = errors(0.0, g, jv, h);
    if (set_.log) {
      *set_.log << "iter " << iter << " obj " << objective(z) / obj_scale_ << " stat " << e0.stat
                << " feas " << e0.feas << " comp " << e0.comp << " mu " << mu << "\n";
    }
    sol.residual = {e0.stat, e0.feas, e0.comp};
    const double err = std::max({e0.stat, e0.feas, e0.comp});
    if (err <= set_.tol) {
      sol.status = NlpStatus::Optimal;
      break;
    }
    acceptable_count = err <= set_.acceptable_tol ? acceptable_count + 1 : 0;
    if (acceptable_count >= set_.acceptable_iter) {
      sol.status = NlpStatus::Acceptable;
      break;
    }
    if (iter == set_.max_iter) break;

    for (;;) {
      Err em = errors(mu, g, jv, h);
      if (std::max({em.stat, em.feas, em.comp}) > 10.0 * mu || mu <= set_.tol / 10.0) break;
      mu = std::max(set_.tol / 10.0, std::min(0.2 * mu, std::pow(mu, 1.5)));
      filter.clear();
    }

    hessian(y, hv);
    for (int v = 0; v < N_; ++v) {
      double s = 0.0;
      if (has_lo_[v]) s += zl[v] / (z[v] - lo_[v]);
      if (has_hi_[v]) s += zu[v] / (hi_[v] - z[v]);
      sigma[v] = s;
    }
    double dw = 0.0, dc = 0.0;
    if (!factor(jv, hv, sigma, dw, dc)) {
      sol.status = NlpStatus::NumericalFailure;
      sol.message = "KKT factorization failed";
      break;
    }

    // Barrier gradient.
    Vec gphi = g;
    for (int v = 0; v < N_; ++v) {
      if (has_lo_[v]) gphi[v] -= mu / (z[v] - lo_[v]);
      if (has_hi_[v]) gphi[v] += mu / (hi_[v] - z[v]);
    }
    Vec jty;
    jt_times(jv, y, jty);
    rhs.head(N_) = -(gphi + jty);
    rhs.tail(M_) = -h;
    sol_vec = solve_kkt(rhs);
    if (!sol_vec.allFinite()) {
      sol.status = NlpStatus::NumericalFailure;
      sol.message = "non-finite Newton step";
      break;
    }
    Vec dz = sol_vec.head(N_);
    Vec dy = sol_vec.tail(M_);

    Vec dzl(N_), dzu(N_);
    for (int v = 0; v < N_; ++v) {
      dzl[v] = has_lo_[v] ? mu / (z[v] - lo_[v]) - zl[v] - zl[v] / (z[v] - lo_[v]) * dz[v] : 0.0;
      dzu[v] = has_hi_[v] ? mu / (hi_[v] - z[v]) - zu[v] + zu[v] / (hi_[v] - z[v]) * dz[v] : 0.0;
    }

    const double tau = std::max(tau_min, 1.0 - mu);
    double amax = 1.0, az = 1.0;
    for (int v = 0; v < N_; ++v) {
      if (has_lo_[v] && dz[v] < 0) amax = std::min(amax, -tau * (z[v] - lo_[v]) / dz[v]);
      if (has_hi_[v] && dz[v] > 0) amax = std::min(amax, tau * (hi_[v] - z[v]) / dz[v]);
      if (has_lo_[v] && dzl[v] < 0) az = std::min(az, -tau * zl[v] / dzl[v]);
      if (has_hi_[v] && dzu[v] < 0) az = std::min(az, -tau * zu[v] / dzu[v]);
    }

    // Filter line search on (theta, barrier objective).
    const double theta0 = h.lpNorm<1>();
    const double gdz = gphi.dot(dz);
    auto barrier_obj = [&](const Vec& zz, double& th) {
      Vec hh;
      constraints(zz, hh);
      th = hh.lpNorm<1>();
      return objective(zz) + barrier(zz, mu);
    };
    double th_dummy;
    const double phi0 = barrier_obj(z, th_dummy);
    if (theta_max < 0.0) {
      theta_max = 1e4 * std::max(1.0, theta0);
      theta_min = 1e-4 * std::max(1.0, theta0);
    }
    const double g_th = 1e-5, g_ph = 1e-5, eta = 1e-4;
    auto in_filter = [&](double th, double ph) {
      if (th > theta_max) return true;
      for (auto [ft, fp] : filter)
        if (th >= ft && ph >= fp) return true;
      return false;
    };
    auto acceptable = [&](double a, double th, double ph, bool& f_type) {
      if (!std::isfinite(ph) || in_filter(th, ph)) return false;
      const bool switching = gdz < 0.0 && a * std::pow(-gdz, 2.3) > std::pow(theta0, 1.1);
      if (theta0 <= theta_min && switching) {
        f_type = true;
        return ph <= phi0 + eta * a * gdz + 1e-14 * std::fabs(phi0);
      }
      f_type = false;
      return th <= (1.0 - g_th) * theta0 || ph <= phi0 - g_ph * theta0;
    };

    double alpha = amax;
    bool accepted = false, f_type = false;
    Vec trial(N_);
    for (int ls = 0; ls < 60; ++ls) {
      trial = z + alpha * dz;
      double th;
      double ph = barrier_obj(trial, th);
      if (acceptable(alpha, th, ph, f_type)) {
        accepted = true;
        break;
      }
      // Second-order correction on the first trial.
      if (ls == 0 && th >= theta0 && M_ > 0) {
        Vec hh;
        constraints(trial, hh);
        Vec jdz;
        j_times(jv, dz, jdz);
        Vec r2(N_ + M_);
        r2.head(N_) = -(gphi + jty);
        r2.tail(M_) = -(hh - jdz);
        Vec s2 = solve_kkt(r2);
        if (s2.allFinite()) {
          Vec dzc = s2.head(N_);
          double ac = 1.0;
          for (int v = 0; v < N_; ++v) {
            if (has_lo_[v] && dzc[v] < 0) ac = std::min(ac, -tau * (z[v] - lo_[v]) / dzc[v]);
            if (has_hi_[v] && dzc[v] > 0) ac = std::min(ac, tau * (hi_[v] - z[v]) / dzc[v]);
          }
          Vec t2 = z + ac * dzc;
          double th2;
          double ph2 = barrier_obj(t2, th2);
          if (acceptable(alpha, th2, ph2, f_type)) {
            trial = t2;
            dy = s2.tail(M_);
            alpha = ac;
            accepted = true;
            break;
          }
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-14) break;
    }
    if (accepted && !f_type) filter.emplace_back((1.0 - g_th) * theta0, phi0 - g_ph * theta0);
    if (!accepted) {
      // Take a short step anyway; repeated failures end the solve.
      ++ls_failures;
      if (ls_failures > 10) {
        sol.status = h.lpNorm<Eigen::Infinity>() > 1e-4 ? NlpStatus::Infeasible
                                                        : NlpStatus::NumericalFailure;
        sol.message = "line search failed";
        break;
      }
      alpha = std::min(amax, 1e-3);
      trial = z + alpha * dz;
    } else {
      ls_failures = 0;
    }
    if (set_.log) *set_.log << "   step alpha " << alpha << " amax " << amax << " az " << az << " dw " << dw << " dc " << dc << "\n";
    z = trial;
    y += alpha * dy;
    zl += az * dzl;
    zu += az * dzu;
    // Keep bound multipliers consistent with the primal-dual Hessian.
    const double ks = 1e10;
    for (int v = 0; v < N_; ++v) {
      if (has_lo_[v]) {
        double s = z[v] - lo_[v];
        zl[v] = std::clamp(zl[v], mu / (ks * s), ks * mu / s);
      }
      if (has_hi_[v]) {
        double s = hi_[v] - z[v];
        zu[v] = std::clamp(zu[v], mu / (ks * s), ks * mu / s);
      }
    }
  }

  sol.iterations = iter;
  sol.x.assign(z.data(), z.data() + n_);
  sol.objective = prob_.objective().value(sol.x);
  sol.multipliers.assign(prob_.num_constraints(), 0.0);
  for (int k = 0; k < M_; ++k)
    if (row_origin_[k] >= 0)
      sol.multipliers[row_origin_[k]] = -y[k] * rows_[k].scale / obj_scale_;
  if (sol.status == NlpStatus::IterationLimit && sol.message.empty())
    sol.message = "iteration limit";
  return sol;
}

}  // namespace

NlpSolution solve(const NlpProblem& problem, const NlpSettings& settings) {
  InteriorPoint ip(problem, settings);
  return ip.run();
}

KktResidual evaluate_kkt(const NlpProblem& problem, const std::vector<double>& x,
                         const std::vector<double>& multipliers) {
  const int n = problem.num_vars();
  const double sense = problem.sense() == Sense::Minimize ? 1.0 : -1.0;
  std::vector<double> r(n, 0.0);
  problem.objective().add_gradient(x, sense, r);
  KktResidual res;
  for (int k = 0; k < problem.num_constraints(); ++k) {
    const auto& c = problem.constraints()[k];
    const double m = multipliers[k];
    c.expr.add_gradient(x, -m, r);
    const double v = c.expr.value(x);
    if (c.kind == ConstraintKind::Equal) {
      res.feasibility = std::max(res.feasibility, std::fabs(v));
    } else {
      res.feasibility = std::max(res.feasibility, std::max(0.0, -v));
      res.complementarity = std::max(res.complementarity, std::fabs(std::min(v, m)));
    }
  }
  double gscale = 1.0;
  {
    std::vector<double> g(n, 0.0);
    problem.objective().add_gradient(x, 1.0, g);
    for (double gi : g) gscale = std::max(gscale, std::fabs(gi));
  }
  for (int v = 0; v < n; ++v) {
    const double l = problem.lower()[v], u = problem.upper()[v];
    double zl = 0.0, zu = 0.0;
    if (std::isfinite(l) && r[v] > 0) zl = r[v];
    if (std::isfinite(u) && r[v] < 0) zu = -r[v];
    res.stationarity = std::max(res.stationarity, std::fabs(r[v] - zl + zu) / gscale);
    if (std::isfinite(l)) {
      res.feasibility = std::max(res.feasibility, std::max(0.0, l - x[v]));
      res.complementarity = std::max(res.complementarity, std::fabs(std::min(x[v] - l, zl)));
    }
    if (std::isfinite(u)) {
      res.feasibility = std::max(res.feasibility, std::max(0.0, x[v] - u));
      res.complementarity = std::max(res.complementarity, std::fabs(std::min(u - x[v], zu)));
    }
  }
  return res;
}

DerivativeCheck check_derivatives(const NlpProblem& problem, const std::vector<double>& x,
                                  double step) {
  DerivativeCheck out;
  const int n = problem.num_vars();
  auto check = [&](const QuadExpr& e, const std::string& label) {
    auto grad = e.gradient(x);
    std::vector<double> xp = x;
    for (const auto& [v, analytic] : grad) {
      const double hstep = step * std::max(1.0, std::fabs(x[v]));
      xp[v] = x[v] + hstep;
      const double fp = e.value(xp);
      xp[v] = x[v] - hstep;
      const double fm = e.value(xp);
      xp[v] = x[v];
      const double fd = (fp - fm) / (2.0 * hstep);
      const double rel = std::fabs(fd - analytic) / std::max(1.0, std::fabs(analytic));
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = label + " d/d" + problem.names()[v];
      }
    }
  };
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("check_derivatives: size mismatch");
  check(problem.objective(), "objective");
  for (int k = 0; k < problem.num_constraints(); ++k) {
    const auto& c = problem.constraints()[k];
    check(c.expr, c.label.empty() ? "row " + std::to_string(k) : c.label);
  }
  return out;
}

}  // namespace dergame
