#include "dergame/expr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dergame {

QuadExpr QuadExpr::var(VarId v, double coef) {
  QuadExpr e;
  e.add_linear(v, coef);
  return e;
}

bool QuadExpr::is_single_var(VarId* v) const {
  if (constant_ != 0.0 || !quad_.empty() || lin_.size() != 1 || lin_[0].coef != 1.0) return false;
  if (v) *v = lin_[0].var;
  return true;
}

QuadExpr& QuadExpr::add_constant(double c) {
  constant_ += c;
  return *this;
}

QuadExpr& QuadExpr::add_linear(VarId v, double coef) {
  if (v < 0) throw std::invalid_argument("QuadExpr: negative variable index");
  if (coef != 0.0) lin_.push_back({v, coef});
  return *this;
}

QuadExpr& QuadExpr::add_quadratic(VarId i, VarId j, double coef) {
  if (i < 0 || j < 0) throw std::invalid_argument("QuadExpr: negative variable index");
  if (coef == 0.0) return *this;
  if (i > j) std::swap(i, j);
  quad_.push_back({i, j, coef});
  return *this;
}

QuadExpr& QuadExpr::operator+=(const QuadExpr& o) {
  constant_ += o.constant_;
  lin_.insert(lin_.end(), o.lin_.begin(), o.lin_.end());
  quad_.insert(quad_.end(), o.quad_.begin(), o.quad_.end());
  return *this;
}

QuadExpr& QuadExpr::operator-=(const QuadExpr& o) {
  constant_ -= o.constant_;
  for (const auto& t : o.lin_) lin_.push_back({t.var, -t.coef});
  for (const auto& t : o.quad_) quad_.push_back({t.i, t.j, -t.coef});
  return *this;
}

QuadExpr& QuadExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& t : lin_) t.coef *= s;
  for (auto& t : quad_) t.coef *= s;
  if (s == 0.0) {
    lin_.clear();
    quad_.clear();
  }
  return *this;
}

QuadExpr& QuadExpr::compact() {
  std::map<VarId, double> l;
  for (const auto& t : lin_) l[t.var] += t.coef;
  std::map<std::pair<VarId, VarId>, double> q;
  for (const auto& t : quad_) q[{t.i, t.j}] += t.coef;
  lin_.clear();
  quad_.clear();
  for (const auto& [v, c] : l)
    if (c != 0.0) lin_.push_back({v, c});
  for (const auto& [ij, c] : q)
    if (c != 0.0) quad_.push_back({ij.first, ij.second, c});
  return *this;
}

double QuadExpr::value(std::span<const double> x) const {
  double v = constant_;
  for (const auto& t : lin_) v += t.coef * x[t.var];
  for (const auto& t : quad_) v += t.coef * x[t.i] * x[t.j];
  return v;
}

void QuadExpr::add_gradient(std::span<const double> x, double scale, std::span<double> g) const {
  for (const auto& t : lin_) g[t.var] += scale * t.coef;
  for (const auto& t : quad_) {
    g[t.i] += scale * t.coef * x[t.j];
    g[t.j] += scale * t.coef * x[t.i];
  }
}

std::vector<QuadExpr::Linear> QuadExpr::gradient(std::span<const double> x) const {
  std::map<VarId, double> g;
  for (const auto& t : lin_) g[t.var] += t.coef;
  for (const auto& t : quad_) {
    g[t.i] += t.coef * x[t.j];
    g[t.j] += t.coef * x[t.i];
  }
  std::vector<Linear> out;
  out.reserve(g.size());
  for (const auto& [v, c] : g) out.push_back({v, c});
  return out;
}

QuadExpr QuadExpr::partial(VarId v) const {
  QuadExpr d;
  for (const auto& t : lin_)
    if (t.var == v) d.add_constant(t.coef);
  for (const auto& t : quad_) {
    if (t.i == v && t.j == v) {
      d.add_linear(v, 2.0 * t.coef);
    } else if (t.i == v) {
      d.add_linear(t.j, t.coef);
    } else if (t.j == v) {
      d.add_linear(t.i, t.coef);
    }
  }
  return d.compact();
}

VarId QuadExpr::max_var() const {
  VarId m = -1;
  for (const auto& t : lin_) m = std::max(m, t.var);
  for (const auto& t : quad_) m = std::max(m, t.j);
  return m;
}

std::string QuadExpr::to_string(const std::vector<std::string>* names) const {
  auto nm = [&](VarId v) {
    if (names && v < static_cast<VarId>(names->size())) return (*names)[v];
    return "x" + std::to_string(v);
  };
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  auto sign = [&](double c) {
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    return std::fabs(c);
  };
  for (const auto& t : lin_) {
    double c = sign(t.coef);
    if (c != 1.0) os << c << "*";
    os << nm(t.var);
  }
  for (const auto& t : quad_) {
    double c = sign(t.coef);
    if (c != 1.0) os << c << "*";
    os << nm(t.i) << "*" << nm(t.j);
  }
  if (constant_ != 0.0 || first) {
    double c = sign(constant_);
    os << c;
  }
  return os.str();
}

QuadExpr operator+(QuadExpr a, const QuadExpr& b) { return a += b; }
QuadExpr operator-(QuadExpr a, const QuadExpr& b) { return a -= b; }
QuadExpr operator-(QuadExpr a) { return a *= -1.0; }
QuadExpr operator*(QuadExpr a, double s) { return a *= s; }
QuadExpr operator*(double s, QuadExpr a) { return a *= s; }

QuadExpr operator*(const QuadExpr& a, const QuadExpr& b) {
  if (!a.is_linear() || !b.is_linear())
    throw std::invalid_argument("QuadExpr product would exceed degree 2");
  QuadExpr r(a.constant() * b.constant());
  for (const auto& t : a.linear()) r.add_linear(t.var, t.coef * b.constant());
  for (const auto& t : b.linear()) r.add_linear(t.var, t.coef * a.constant());
  for (const auto& s : a.linear())
    for (const auto& t : b.linear()) r.add_quadratic(s.var, t.var, s.coef * t.coef);
  return r;
}

}  // namespace dergame
