#pragma once

#include <stdexcept>
#include <vector>

namespace dergame {

class NonpositiveDenominator : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DispatchExceedsAvailability : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One aggregator unit over the flattened (t, r) grid.
struct AggregatorDecision {
  double g_max = 0.0;               // MW
  std::vector<double> transmission; // g^T per (t, r)
  std::vector<double> distribution; // g^D per (t, r)
};

/// Sum_k w_k [(lmp_k - C) g^T_k + (pi_k - C) g^D_k] - C_inv g_max.
/// Empty `weights` means one hour per period.
double aggregator_profit(const AggregatorDecision& d, const std::vector<double>& lmp,
                         const std::vector<double>& pi_der, double cost, double invest_cost,
                         const std::vector<double>& weights = {});

/// Mean of kappa * kappa'_k, the scalar that multiplies the sizing rule.
double mean_availability(double kappa, const std::vector<double>& forecast);

/// g_max = C_inv / (kbar (C_inv - Sum_k w_k kappa kappa'_k (pi_k - C))).
/// Throws NonpositiveDenominator when the margin sum reaches C_inv.
double closed_form_gmax(double invest_cost, double kappa, const std::vector<double>& forecast,
                        const std::vector<double>& pi_der, double cost,
                        const std::vector<double>& weights = {});

struct CappedCapacity {
  double g_max = 0.0;
  bool capped = false;                 // the cap was active
  bool nonpositive_denominator = false;
};

/// min(closed form, cap), treating a nonpositive denominator as "at the cap".
CappedCapacity capped_gmax(double invest_cost, double kappa, const std::vector<double>& forecast,
                           const std::vector<double>& pi_der, double cost, double cap,
                           const std::vector<double>& weights = {});

/// g^D as dispatched, g^T = kappa kappa' g_max - g^D.
AggregatorDecision offer_split(double g_max, double kappa, const std::vector<double>& forecast,
                               const std::vector<double>& dispatched);

}  // namespace dergame
