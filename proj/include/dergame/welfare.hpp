#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "dergame/distflow.hpp"
#include "dergame/model.hpp"

namespace dergame {

/// Primal quantities of one market outcome.
struct MarketPoint {
  std::vector<double> tariff;                  // pi per k
  std::vector<std::vector<double>> demand;     // flexible d [node][k]
  FlowState flow;
  std::vector<double> g_max;                   // installed capacity per node
  std::vector<double> g_available;             // capacity that can inject; empty = g_max
  std::vector<std::vector<double>> pi_der;     // [node][k], 0 where no DER
};

struct WelfareReport {
  double consumer_surplus = 0.0;
  double utility_surplus = 0.0;
  double aggregator_surplus = 0.0;
  double emissions_damage = 0.0;
  double total = 0.0;
  std::vector<double> tariff_peak, tariff_offpeak;  // per representative day
  std::vector<double> capacity;                     // per node
  std::vector<std::vector<double>> compensation;    // [node][k]
  double revenue_adequacy_gap = 0.0;
  double revenue = 0.0;                             // tariff revenue, for relative gaps
  double emissions = 0.0;                           // e + E, ton
};

class TouStructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Social welfare and its decomposition. Sums are duration-weighted; the
/// consumer term uses M x - N x^2 / 2 with x = d + D.
WelfareReport objective(const MarketPoint& pt, const Scenario& s);

/// Tariff revenue - (1 + upsilon) C_cap - (sum C_i g_i + sum lambda^T g_b0).
double revenue_adequacy_gap(const MarketPoint& pt, const Scenario& s);

/// (peak, off-peak) per representative day; throws TouStructureError if a
/// block holds distinct values (beyond `tol`).
std::pair<std::vector<double>, std::vector<double>> tou_structure(const std::vector<double>& tariff,
                                                                  const TimeStructure& times,
                                                                  double tol = 1e-9);

/// g^T = kappa kappa' g_available - g^D per [node][k].
std::vector<std::vector<double>> transmission_offer(const MarketPoint& pt, const Scenario& s);

}  // namespace dergame
