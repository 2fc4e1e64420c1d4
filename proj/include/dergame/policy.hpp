#pragma once

#include <string>
#include <vector>

#include "dergame/model.hpp"

namespace dergame {

/// pi^DER per node and flattened (t, r).
struct CompensationSchedule {
  Policy kind = Policy::NEM;
  std::vector<std::vector<double>> price;  // [node][k], $/MWh
  std::string provenance;

  double at(int b, int k) const { return price[b][k]; }
  /// Largest population variance across nodes over all periods.
  double spatial_variance() const;
};

/// Every node receives the retail tariff.
CompensationSchedule nem_price(const std::vector<double>& tariff, int num_nodes);

/// lmp + gamma_EC * R_marginal + the upper-capacity dual of the line into the
/// node (zero at the root). `tau_bar` is indexed by line.
CompensationSchedule vs_price(const std::vector<double>& lmp, double env_cost,
                              const std::vector<double>& marginal_emission,
                              const std::vector<double>& tau_bar, const Network& network);

/// Duals of the nodal active balance, [node][k].
CompensationSchedule dlmp_price(const std::vector<std::vector<double>>& balance_duals);

}  // namespace dergame
