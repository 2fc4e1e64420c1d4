#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dergame {

/// Index into a decision vector.
using VarId = int;

/// Scalar polynomial of degree <= 2 over a decision vector:
///   constant + sum_k a_k x_k + sum_k c_k x_i x_j.
/// Every model in this library (LinDistFlow, KKT rows, complementarity
/// products, cone constraints) fits this form, so gradients and Hessians
/// are exact.
class QuadExpr {
 public:
  struct Linear {
    VarId var;
    double coef;
  };
  struct Quadratic {
    VarId i;  // i <= j
    VarId j;
    double coef;
  };

  QuadExpr() = default;
  QuadExpr(double c) : constant_(c) {}  // NOLINT(implicit)

  static QuadExpr var(VarId v, double coef = 1.0);

  double constant() const { return constant_; }
  const std::vector<Linear>& linear() const { return lin_; }
  const std::vector<Quadratic>& quadratic() const { return quad_; }

  bool is_linear() const { return quad_.empty(); }
  bool is_constant() const { return quad_.empty() && lin_.empty(); }
  /// True if the expression is exactly `1 * x_v` for some v.
  bool is_single_var(VarId* v = nullptr) const;

  QuadExpr& add_constant(double c);
  QuadExpr& add_linear(VarId v, double coef);
  QuadExpr& add_quadratic(VarId i, VarId j, double coef);

  QuadExpr& operator+=(const QuadExpr& o);
  QuadExpr& operator-=(const QuadExpr& o);
  QuadExpr& operator*=(double s);

  /// Merges duplicate terms and drops exact zeros.
  QuadExpr& compact();

  double value(std::span<const double> x) const;
  /// Accumulates scale * grad into g (dense).
  void add_gradient(std::span<const double> x, double scale, std::span<double> g) const;
  /// Sparse gradient (var, d/dvar) at x, duplicates merged.
  std::vector<Linear> gradient(std::span<const double> x) const;
  /// Partial derivative w.r.t. v as an expression (degree <= 1).
  QuadExpr partial(VarId v) const;
  /// Largest variable index referenced, or -1.
  VarId max_var() const;

  std::string to_string(const std::vector<std::string>* names = nullptr) const;

 private:
  double constant_ = 0.0;
  std::vector<Linear> lin_;
  std::vector<Quadratic> quad_;
};

QuadExpr operator+(QuadExpr a, const QuadExpr& b);
QuadExpr operator-(QuadExpr a, const QuadExpr& b);
QuadExpr operator-(QuadExpr a);
QuadExpr operator*(QuadExpr a, double s);
QuadExpr operator*(double s, QuadExpr a);
/// Product of two expressions of degree <= 1. Throws std::invalid_argument
/// if the result would exceed degree 2.
QuadExpr operator*(const QuadExpr& a, const QuadExpr& b);

}  // namespace dergame
