#include "dergame/beliefs.hpp"

namespace dergame {

std::vector<double> apply_hosting_belief(const Scenario& s, const BeliefModel& b) {
  const auto& H = s.econ.hosting;
  if (b.hosting.size() != H.size()) throw ValidationError("belief hosting must cover every node");
  for (std::size_t k = 0; k < H.size(); ++k) {
    if (b.hosting[k] < 0.0) throw ValidationError("belief hosting must be >= 0");
    if (b.stance == Stance::Optimistic && b.hosting[k] < H[k])
      throw ValidationError("optimistic hosting belief below true hosting capacity");
    if (b.stance == Stance::Pessimistic && b.hosting[k] > H[k])
      throw ValidationError("pessimistic hosting belief above true hosting capacity");
  }
  return b.hosting;
}

DemandBelief apply_demand_belief(const Scenario&, const BeliefModel& b) {
  if (!(b.alpha_demand > 0.0)) throw ValidationError("alpha_demand must be positive");
  if (b.stance == Stance::Optimistic && b.alpha_demand < 1.0)
    throw ValidationError("optimistic demand belief needs alpha >= 1");
  if (b.stance == Stance::Pessimistic && b.alpha_demand > 1.0)
    throw ValidationError("pessimistic demand belief needs alpha <= 1");
  if (b.reactive_ratio && *b.reactive_ratio < 0.0) throw ValidationError("reactive_ratio must be >= 0");
  return DemandBelief{b.alpha_demand, b.reactive_ratio};
}

LowerLevelView true_view(const Scenario& s) {
  return LowerLevelView{s.econ.hosting, DemandBelief{}};
}

LowerLevelView lower_level_view(const Scenario& s) {
  LowerLevelView v = true_view(s);
  if (s.info == InfoCase::CompleteInfo) return v;
  if (!s.beliefs) throw ValidationError("asymmetric case without belief parameters");
  if (s.info == InfoCase::HostingAsym || s.info == InfoCase::BothAsym)
    v.hosting = apply_hosting_belief(s, *s.beliefs);
  if (s.info == InfoCase::ConsumerAsym || s.info == InfoCase::BothAsym)
    v.demand = apply_demand_belief(s, *s.beliefs);
  return v;
}

}  // namespace dergame
