#pragma once

#include <string>
#include <vector>

#include "dergame/mpec.hpp"

namespace dergame::oracle {

struct DrawStats {
  int draws = 0;
  int failures = 0;
  double worst = 0.0;  // largest violation, in units of the allowed slack
  std::string example; // first failing draw
};

// flexible_demand against a grid argmax of M d - N d^2 / 2 - pi d on [0, M/N].
DrawStats consumer_draws(int draws, unsigned seed);

// Capped sizing rule against a grid search of aggregator_profit on [0, H] with
// offers sent to the higher-margin market.
DrawStats aggregator_draws(int draws, unsigned seed);

MpecProblem mpec_fixture(unsigned seed, int nvars, int npairs);
std::vector<std::vector<double>> fixture_starts(int nvars);
// Best objective over every branch of the complementarity pairs.
double enumerate_branches(const MpecProblem& mp);

struct FdModel {
  std::string name;
  NlpProblem problem;
  std::vector<double> center;
};

// Relaxed first and second game, the lower level alone and a small fixture.
std::vector<FdModel> derivative_models(const std::string& scenario_path);

// Worst relative central-difference error over `points` perturbations of the center.
DerivativeCheck fd_check(const FdModel& m, int points, unsigned seed);

}  // namespace dergame::oracle
