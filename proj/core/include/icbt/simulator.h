#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "icbt/dataset.h"
#include "icbt/model.h"

namespace icbt {

struct TournamentSpec {
  std::size_t n = 20;
  int m = 1;  // number of round robins
  std::uint64_t seed = 0;
};

// Every pair meets m times; each outcome is an independent Bernoulli draw
// from the truth's pairwise probabilities. Objects are labelled "1".."n".
ComparisonDataset simulate_round_robin(const ModelState& truth, const TournamentSpec& spec);

// Intransitivity levels of the four simulation scenarios.
std::vector<double> scenario_levels(int id);

// Ground truth for scenario 1..4: n = 20 objects, two per each of 10 normal
// skill levels (standard deviation `skill_sd`), object 0 as reference, and
// free pairs spread uniformly over the labels -K..K. Throws
// std::invalid_argument for an unknown id.
ModelState scenario_preset(int id, std::uint64_t seed, double skill_sd = 1.0);

}  // namespace icbt
