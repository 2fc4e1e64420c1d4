#include "dergame/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dergame {

double CompensationSchedule::spatial_variance() const {
  if (price.empty()) return 0.0;
  double worst = 0.0;
  const std::size_t K = price.front().size();
  const double n = static_cast<double>(price.size());
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (const auto& row : price) mean += row[k];
    mean /= n;
    double var = 0.0;
    for (const auto& row : price) var += (row[k] - mean) * (row[k] - mean);
    worst = std::max(worst, var / n);
  }
  return worst;
}

CompensationSchedule nem_price(const std::vector<double>& tariff, int num_nodes) {
  if (tariff.empty()) throw std::invalid_argument("nem_price: empty tariff grid");
  if (num_nodes <= 0) throw std::invalid_argument("nem_price: no nodes");
  CompensationSchedule s;
  s.kind = Policy::NEM;
  s.price.assign(num_nodes, tariff);
  s.provenance = "retail tariff";
  return s;
}

CompensationSchedule vs_price(const std::vector<double>& lmp, double env_cost,
                              const std::vector<double>& marginal_emission,
                              const std::vector<double>& tau_bar, const Network& network) {
  if (lmp.empty()) throw std::invalid_argument("vs_price: empty price grid");
  if (marginal_emission.size() != lmp.size())
    throw std::invalid_argument("vs_price: emission series length mismatch");
  if (static_cast<int>(tau_bar.size()) != network.num_lines())
    throw std::invalid_argument("vs_price: one capacity dual per line required");
  for (double t : tau_bar)
    if (t < 0.0 || !std::isfinite(t)) throw std::invalid_argument("vs_price: capacity duals must be >= 0");
  CompensationSchedule s;
  s.kind = Policy::VS;
  s.provenance = "lmp + env_cost * marginal_emission + line capacity dual";
  s.price.assign(network.num_nodes(), std::vector<double>(lmp.size()));
  for (int b = 0; b < network.num_nodes(); ++b) {
    const int l = network.line_into(b);
    const double tau = l < 0 ? 0.0 : tau_bar[l];
    for (std::size_t k = 0; k < lmp.size(); ++k)
      s.price[b][k] = lmp[k] + env_cost * marginal_emission[k] + tau;
  }
  return s;
}

CompensationSchedule dlmp_price(const std::vector<std::vector<double>>& balance_duals) {
  if (balance_duals.empty() || balance_duals.front().empty())
    throw std::invalid_argument("dlmp_price: balance duals are missing");
  for (const auto& row : balance_duals)
    if (row.size() != balance_duals.front().size())
      throw std::invalid_argument("dlmp_price: ragged dual grid");
  CompensationSchedule s;
  s.kind = Policy::DLMP;
  s.price = balance_duals;
  s.provenance = "active balance duals";
  return s;
}

}  // namespace dergame
