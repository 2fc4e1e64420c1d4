#pragma once

#include <string>

#include "dergame/model.hpp"

namespace dergame::fixture {

inline std::string data_path(const std::string& file = "manhattan7.yaml") {
  return std::string(DERGAME_DATA_DIR) + "/" + file;
}

// Three buses a - b - c with a tight last line and one DER at c.
inline std::string tiny_yaml() {
  return R"(id: tiny
network:
  nodes: [a, b, c]
  root: a
  interface_limit: 100
  lines:
    - {from: a, to: b, resistance: 0.0004, reactance: 0.0003, s_max: 50}
    - {from: b, to: c, resistance: 0.0005, reactance: 0.0004, s_max: 3}
time:
  intervals: 2
  duration: 2.0
  peak: [1]
generators:
  - {id: peaker, node: a, cost: 50, emission_factor: 0.6, p_max: 100, q_min: -50, q_max: 50}
  - {id: local, node: c, cost: 90, emission_factor: 0.8, p_max: 40, q_min: -20, q_max: 20}
  - {id: der, node: c, owner: aggregator, cost: 0, invest_cost: 100, capacity_factor: 1.0, forecast: [0.5, 0.8]}
demand:
  N: 2
  nodes:
    a: {p: [2, 3], q: [0.5, 0.5], M: [40, 60]}
    b: {p: [2, 3], q: [0.5, 0.5], M: [40, 60]}
    c: {p: [4, 6], q: [1, 1], M: [40, 60]}
economics:
  lmp: [20, 30]
  marginal_emission: [0.5, 0.6]
  carbon_penalty: 10
  carbon_env_cost: 30
  utility_capital: 100
  rate_of_return: 0.1
  grid_emission_factor: 0.5
  hosting: {a: 0, b: 0, c: 5}
)";
}

inline Scenario tiny() { return parse_scenario(tiny_yaml()); }

}  // namespace dergame::fixture
