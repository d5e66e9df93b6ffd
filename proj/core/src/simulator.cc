#include "icbt/simulator.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace icbt {

ComparisonDataset simulate_round_robin(const ModelState& truth, const TournamentSpec& spec) {
  if (spec.n < 2 || spec.m < 1) throw std::invalid_argument("tournament needs n >= 2 and m >= 1");
  if (truth.num_objects() != spec.n) throw std::invalid_argument("truth does not cover n objects");
  const ProbabilityMatrix p = pairwise_probability_matrix(truth);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Comparison> comps;
  comps.reserve(static_cast<std::size_t>(spec.m) * num_pairs(spec.n));
  for (int round = 0; round < spec.m; ++round) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      for (std::size_t k = i + 1; k < spec.n; ++k) {
        comps.push_back({i, k, unif(rng) < p(i, k)});
      }
    }
  }
  return ComparisonDataset(ObjectIndex::numbered(spec.n), std::move(comps));
}

std::vector<double> scenario_levels(int id) {
  switch (id) {
    case 1: return {};
    case 2: return {0.7};
    case 3: return {0.5, 0.9};
    case 4: return {0.4, 0.8, 1.2};
    default: throw std::invalid_argument("scenario id must be 1..4, got " + std::to_string(id));
  }
}

ModelState scenario_preset(int id, std::uint64_t seed, double skill_sd) {
  constexpr std::size_t n = 20;
  constexpr std::size_t num_levels = n / 2;
  IntransitivityClustering z;
  z.levels = scenario_levels(id);
  if (!(skill_sd > 0.0)) throw std::invalid_argument("skill_sd must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, skill_sd);
  std::vector<double> draws(num_levels);
  for (double& d : draws) d = normal(rng);
  std::vector<std::size_t> objects(n);
  std::iota(objects.begin(), objects.end(), 0);
  std::shuffle(objects.begin(), objects.end(), rng);
  std::vector<std::size_t> level_of(n);
  for (std::size_t t = 0; t < n; ++t) level_of[objects[t]] = t / 2;

  // Shift every level by the reference's so that object 0 sits at zero;
  // skill differences, and hence the model, are unchanged.
  const double shift = draws[level_of[0]];
  std::vector<std::size_t> by_value(num_levels);
  std::iota(by_value.begin(), by_value.end(), 0);
  std::sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) { return draws[a] < draws[b]; });
  std::vector<std::size_t> sorted_pos(num_levels);
  SkillClustering skills;
  skills.levels.clear();
  for (std::size_t r = 0; r < num_levels; ++r) {
    sorted_pos[by_value[r]] = r;
    skills.levels.push_back(draws[by_value[r]] - shift);
  }
  skills.zero_position = sorted_pos[level_of[0]];
  skills.levels[skills.zero_position] = 0.0;
  skills.position.resize(n);
  for (std::size_t i = 0; i < n; ++i) skills.position[i] = sorted_pos[level_of[i]];

  auto constraints = PairConstraints::star(n, 0);
  z.label.assign(num_pairs(n), 0);
  const int K = z.K();
  std::uniform_int_distribution<int> lab(-K, K);
  for (auto pid : constraints->free_pairs()) z.label[pid] = lab(rng);
  return ModelState(constraints, std::move(skills), std::move(z));
}

}  // namespace icbt
