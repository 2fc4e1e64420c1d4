#include "dergame/welfare.hpp"

#include <cmath>
#include <string>

namespace dergame {

namespace {

void check(const MarketPoint& pt, const Scenario& s) {
  const int n = s.network.num_nodes();
  const std::size_t K = s.times.size();
  if (pt.tariff.size() != K) throw std::invalid_argument("market point: tariff length");
  if (static_cast<int>(pt.demand.size()) != n || static_cast<int>(pt.g_max.size()) != n ||
      static_cast<int>(pt.pi_der.size()) != n)
    throw std::invalid_argument("market point: node count");
  for (int b = 0; b < n; ++b)
    if (pt.demand[b].size() != K || pt.pi_der[b].size() != K)
      throw std::invalid_argument("market point: period count");
  if (pt.flow.root_p.size() != K) throw std::invalid_argument("market point: missing flow state");
}

double available(const MarketPoint& pt, int b) {
  return pt.g_available.empty() ? pt.g_max[b] : pt.g_available[b];
}

}  // namespace

std::vector<std::vector<double>> transmission_offer(const MarketPoint& pt, const Scenario& s) {
  const int n = s.network.num_nodes();
  const int K = s.times.size();
  std::vector<std::vector<double>> gt(n, std::vector<double>(K, 0.0));
  for (int b = 0; b < n; ++b) {
    const Generator* der = s.der_at(b);
    if (!der) continue;
    for (int k = 0; k < K; ++k)
      gt[b][k] = der->capacity_factor * der->forecast[k] * available(pt, b) - pt.flow.der[b][k];
  }
  return gt;
}

double revenue_adequacy_gap(const MarketPoint& pt, const Scenario& s) {
  check(pt, s);
  const auto units = s.utility_units();
  const auto& lmp = s.lmp();
  double gap = -(1.0 + s.econ.rate_of_return) * s.econ.utility_capital * s.times.days;
  for (int k = 0; k < s.times.size(); ++k) {
    const double w = s.times.weight(k);
    for (int b = 0; b < s.network.num_nodes(); ++b)
      gap += w * pt.tariff[k] * (pt.demand[b][k] + s.demand.inflexible_p[b][k]);
    gap -= w * lmp[k] * pt.flow.root_p[k];
    for (std::size_t u = 0; u < units.size(); ++u) gap -= w * units[u]->cost * pt.flow.gen_p[u][k];
  }
  return gap;
}

WelfareReport objective(const MarketPoint& pt, const Scenario& s) {
  check(pt, s);
  WelfareReport r;
  const int n = s.network.num_nodes();
  const int K = s.times.size();
  const auto units = s.utility_units();
  const auto& lmp = s.lmp();
  const double N = s.demand.utility_n;
  const double gamma = s.gamma();
  const auto gt = transmission_offer(pt, s);

  double capital = s.econ.utility_capital * s.times.days;
  r.utility_surplus = -capital;
  for (int k = 0; k < K; ++k) {
    const double w = s.times.weight(k);
    for (int b = 0; b < n; ++b) {
      const double x = pt.demand[b][k] + s.demand.inflexible_p[b][k];
      const double pay = pt.tariff[k] * x;
      r.consumer_surplus += w * (s.demand.utility_m[b][k] * x - 0.5 * N * x * x - pay);
      r.utility_surplus += w * pay;
      r.revenue += w * pay;
    }
    r.utility_surplus -= w * lmp[k] * pt.flow.root_p[k];
    for (std::size_t u = 0; u < units.size(); ++u)
      r.utility_surplus -= w * (units[u]->cost + gamma * units[u]->emission_factor) * pt.flow.gen_p[u][k];
    for (int b = 0; b < n; ++b) {
      const Generator* der = s.der_at(b);
      if (!der) continue;
      const double payment = w * pt.pi_der[b][k] * pt.flow.der[b][k];
      r.utility_surplus -= payment;
      r.aggregator_surplus += payment + w * lmp[k] * gt[b][k] - w * der->cost * (gt[b][k] + pt.flow.der[b][k]);
    }
  }
  for (int b = 0; b < n; ++b)
    if (const Generator* der = s.der_at(b)) r.aggregator_surplus -= der->invest_cost * s.times.days * pt.g_max[b];

  const Emissions em = emissions(pt.flow, s);
  r.emissions = em.total + em.interface;
  r.emissions_damage = (s.econ.carbon_env_cost - gamma) * r.emissions;
  r.total = r.consumer_surplus + r.utility_surplus + r.aggregator_surplus - r.emissions_damage;

  std::vector<double> tariff = pt.tariff;
  auto [peak, off] = tou_structure(tariff, s.times, 1e-6 * (1.0 + std::fabs(tariff.empty() ? 0.0 : tariff[0])));
  r.tariff_peak = std::move(peak);
  r.tariff_offpeak = std::move(off);
  r.capacity = pt.g_max;
  r.compensation = pt.pi_der;
  r.revenue_adequacy_gap = revenue_adequacy_gap(pt, s);
  return r;
}

std::pair<std::vector<double>, std::vector<double>> tou_structure(const std::vector<double>& tariff,
                                                                  const TimeStructure& times, double tol) {
  if (static_cast<int>(tariff.size()) != times.size())
    throw std::invalid_argument("tariff length does not match the time grid");
  const bool has_peak = !times.peak.empty();
  const bool has_off = static_cast<int>(times.peak.size()) < times.intervals;
  if (!has_peak || !has_off) throw TouStructureError("both tariff blocks must be nonempty");
  std::vector<double> peak(times.days, NAN), off(times.days, NAN);
  for (int k = 0; k < times.size(); ++k) {
    double& slot = times.is_peak(k) ? peak[times.day(k)] : off[times.day(k)];
    if (std::isnan(slot)) slot = tariff[k];
    else if (std::fabs(slot - tariff[k]) > tol)
      throw TouStructureError("distinct tariffs inside one block on day " + std::to_string(times.day(k)));
  }
  return {peak, off};
}

}  // namespace dergame
