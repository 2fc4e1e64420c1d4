#pragma once

#include <optional>
#include <vector>

#include "dergame/model.hpp"

namespace dergame {

struct DemandBelief {
  double alpha = 1.0;
  /// Reactive demand = phi * believed active demand. Unset: the true
  /// reactive demand is scaled by alpha (same Q/P ratio as the truth).
  std::optional<double> phi;

  double active(double d) const { return alpha * d; }
  double reactive(double true_q, double believed_p) const {
    return phi ? *phi * believed_p : alpha * true_q;
  }
};

/// What the SLSF-1 lower level sees.
struct LowerLevelView {
  std::vector<double> hosting;  // capacity bound per node
  DemandBelief demand;
};

/// Capacity bound per node under a hosting belief. Rejects beliefs whose
/// values contradict the stance (optimistic below, pessimistic above the truth).
std::vector<double> apply_hosting_belief(const Scenario& s, const BeliefModel& b);

/// Demand scaling under a demand belief. Rejects alpha <= 0 and alpha on the
/// wrong side of 1 for the stance.
DemandBelief apply_demand_belief(const Scenario& s, const BeliefModel& b);

/// Case-dependent view: truth for CompleteInfo, beliefs where asymmetry is active.
LowerLevelView lower_level_view(const Scenario& s);

/// Truth, whatever the case (used by SLSF-2 and the upper level).
LowerLevelView true_view(const Scenario& s);

}  // namespace dergame
