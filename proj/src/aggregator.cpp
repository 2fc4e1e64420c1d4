#include "dergame/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dergame {

namespace {

double w(const std::vector<double>& weights, std::size_t k) {
  return weights.empty() ? 1.0 : weights[k];
}

void same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

double aggregator_profit(const AggregatorDecision& d, const std::vector<double>& lmp,
                         const std::vector<double>& pi_der, double cost, double invest_cost,
                         const std::vector<double>& weights) {
  const std::size_t K = lmp.size();
  same_size(d.transmission.size(), K, "aggregator_profit");
  same_size(d.distribution.size(), K, "aggregator_profit");
  same_size(pi_der.size(), K, "aggregator_profit");
  if (!weights.empty()) same_size(weights.size(), K, "aggregator_profit");
  double p = -invest_cost * d.g_max;
  for (std::size_t k = 0; k < K; ++k)
    p += w(weights, k) * ((lmp[k] - cost) * d.transmission[k] + (pi_der[k] - cost) * d.distribution[k]);
  return p;
}

double mean_availability(double kappa, const std::vector<double>& forecast) {
  if (forecast.empty()) throw std::invalid_argument("mean_availability: empty forecast");
  double s = 0.0;
  for (double f : forecast) s += kappa * f;
  return s / static_cast<double>(forecast.size());
}

double closed_form_gmax(double invest_cost, double kappa, const std::vector<double>& forecast,
                        const std::vector<double>& pi_der, double cost,
                        const std::vector<double>& weights) {
  same_size(pi_der.size(), forecast.size(), "closed_form_gmax");
  if (!weights.empty()) same_size(weights.size(), forecast.size(), "closed_form_gmax");
  double margin = 0.0;
  for (std::size_t k = 0; k < forecast.size(); ++k)
    margin += w(weights, k) * kappa * forecast[k] * (pi_der[k] - cost);
  const double kbar = mean_availability(kappa, forecast);
  const double denom = kbar * (invest_cost - margin);
  if (!(denom > 0.0))
    throw NonpositiveDenominator("sizing denominator is nonpositive (margin " + std::to_string(margin) +
                                 " >= investment cost " + std::to_string(invest_cost) + ")");
  return invest_cost / denom;
}

CappedCapacity capped_gmax(double invest_cost, double kappa, const std::vector<double>& forecast,
                           const std::vector<double>& pi_der, double cost, double cap,
                           const std::vector<double>& weights) {
  CappedCapacity c;
  try {
    const double g = closed_form_gmax(invest_cost, kappa, forecast, pi_der, cost, weights);
    c.capped = g >= cap;
    c.g_max = std::min(g, cap);
  } catch (const NonpositiveDenominator&) {
    c.nonpositive_denominator = true;
    c.capped = true;
    c.g_max = cap;
  }
  return c;
}

AggregatorDecision offer_split(double g_max, double kappa, const std::vector<double>& forecast,
                               const std::vector<double>& dispatched) {
  same_size(dispatched.size(), forecast.size(), "offer_split");
  AggregatorDecision d;
  d.g_max = g_max;
  for (std::size_t k = 0; k < forecast.size(); ++k) {
    const double avail = kappa * forecast[k] * g_max;
    const double gd = dispatched[k];
    if (gd < 0.0 || gd > avail * (1.0 + 1e-12) + 1e-12)
      throw DispatchExceedsAvailability("dispatch " + std::to_string(gd) + " outside [0, " +
                                        std::to_string(avail) + "] at period " + std::to_string(k));
    d.distribution.push_back(gd);
    d.transmission.push_back(std::max(0.0, avail - gd));
  }
  return d;
}

}  // namespace dergame
