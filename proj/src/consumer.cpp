#include "dergame/consumer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dergame {

namespace {
void check(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}
}  // namespace

double consumer_utility(double m, double n, double x) {
  check(m, "M");
  check(n, "N");
  check(x, "demand");
  if (n <= 0.0) throw std::invalid_argument("N must be positive");
  if (x >= m / n) return m * m / (2.0 * n);
  return m * x - 0.5 * n * x * x;
}

double flexible_demand(double m, double n, double pi) {
  check(m, "M");
  check(n, "N");
  check(pi, "tariff");
  if (n <= 0.0) throw std::invalid_argument("N must be positive");
  if (m <= 0.0) return 0.0;
  return std::clamp((m - pi) / n, 0.0, m / n);
}

double consumer_surplus(double m, double n, double d, double inflexible, double pi) {
  check(pi, "tariff");
  check(inflexible, "inflexible demand");
  if (d < 0.0) throw std::invalid_argument("flexible demand must be >= 0");
  const double x = d + inflexible;
  return consumer_utility(m, n, x) - pi * x;
}

}  // namespace dergame
