#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "icbt/bt.h"
#include "icbt/dataset.h"
#include "icbt/model.h"
#include "icbt/priors.h"

namespace icbt {

struct InitConfig {
  double alpha_p = 2.0;  // Beta pseudo-counts for the naive probabilities
  double beta_p = 2.0;
  int K_min = 0;
  int K_max = 5;
  int A_min = 0;
  int A_max = 12;        // further capped at n - 1
  int kmeans_restarts = 10;
  // Warmup iterations: levels only, then levels plus reallocation.
  std::array<long, 2> stage_lengths{2000, 2000};

  // Throws std::invalid_argument on empty ranges or non-positive counts.
  void validate() const;
};

// (w_ik + alpha_p) / (n_ik + alpha_p + beta_p), with p(k, i) = 1 - p(i, k).
ProbabilityMatrix naive_pair_probabilities(const ComparisonDataset& data, double alpha_p = 2.0,
                                           double beta_p = 2.0);

// logit(naive) - logit(bt); throws std::invalid_argument on an entry outside (0, 1).
ProbabilityMatrix empirical_intransitivity(const ProbabilityMatrix& naive, const ProbabilityMatrix& bt);

struct KMeansResult {
  std::vector<double> centers;           // increasing
  std::vector<std::size_t> assignment;   // index into centers
  double wcss = 0.0;
};

// Lloyd iterations from k-means++ seeds; best of `restarts` runs.
// Throws std::invalid_argument when k < 1 or k exceeds the distinct values.
KMeansResult kmeans_1d(std::span<const double> values, int k, int restarts, std::uint64_t seed);

struct InitSelection {
  ModelState state;
  double bic_K = 0.0;  // BIC of the chosen intransitivity model
  double bic = 0.0;    // BIC of the final (K, A) model
};

// Two-phase BIC search (p = K + A): K first with the BT skills, then A by
// clustering the BT skills with the chosen intransitivity labels held fixed.
InitSelection select_by_bic(const ComparisonDataset& data, const BtFit& bt, const InitConfig& config,
                            std::uint64_t seed);

struct WarmupResult {
  ModelState state;
  std::vector<double> log_posterior;  // one entry per warmup iteration
  double step_theta = 0.5;
  double step_phi = 0.5;
};

// Stage 1 moves only the level values; stage 2 adds Gibbs reallocation.
// K and A never change. Random-walk steps adapt from the given starting values.
WarmupResult staged_warmup(const ModelState& state, const ComparisonDataset& data,
                           const Hyperparameters& h, const InitConfig& config, std::uint64_t seed,
                           double step_theta = 0.5, double step_phi = 0.5);

}  // namespace icbt
