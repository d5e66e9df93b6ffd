#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icbt/bt.h"
#include "icbt/dataset.h"
#include "icbt/model.h"

namespace icbt {

// Per-object scores with the objects ordered best first.
struct Ranking {
  std::vector<double> score;
  std::vector<std::size_t> order;
};

// Orders objects by descending score; equal scores keep index order.
Ranking rank_by_score(std::vector<double> score);

// p_i. = mean over j != i of p_ij.
Ranking rank_by_average_probability(const ProbabilityMatrix& p);
// a_i = r_i + (1/n) sum_j theta_ij.
Ranking rank_by_ability(const ModelState& state);

// theta*_ij = theta_ij + (r_i - r_j) - (r_i^BT - r_j^BT), as a dense table.
ProbabilityMatrix adjusted_intransitivity(const ModelState& state, const BtFit& bt);
ProbabilityMatrix adjusted_intransitivity(const ProbabilityMatrix& theta,
                                          std::span<const double> skills, const BtFit& bt);

// P(first wins) for every comparison of `data` under a probability table.
std::vector<double> predict(const ProbabilityMatrix& p, const ComparisonDataset& data);

inline constexpr double kLogLossClamp = 1e-12;

// Mean negative log-likelihood of the outcomes; predictions are P(first wins)
// and are clamped to [1e-12, 1 - 1e-12]. `clamped` receives the number of
// predictions that hit the clamp.
double log_loss(std::span<const double> predictions, const ComparisonDataset& test,
                std::size_t* clamped = nullptr);

// baseline - model: positive when the model improves on the baseline.
double relative_log_loss(double model_ll, double baseline_ll);

// Share of comparisons won by the object placed higher in `order`.
double ranking_accuracy(std::span<const std::size_t> order, const ComparisonDataset& data);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
};

// Spearman correlation of two per-object rank (or score) vectors with a
// two-sided permutation p-value. Ties receive average ranks.
SpearmanResult spearman_comparison(std::span<const double> rank_a, std::span<const double> rank_b,
                                   std::size_t permutations = 10000, std::uint64_t seed = 0);

// Uniform random partition; the train part holds round(fraction * size)
// comparisons.
std::pair<ComparisonDataset, ComparisonDataset> train_test_split(const ComparisonDataset& data,
                                                                 double train_fraction,
                                                                 std::uint64_t seed);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Linear interpolation quantile of an unsorted sample, q in [0, 1].
double empirical_quantile(std::vector<double> values, double q);

struct PosteriorSummary {
  std::vector<std::string> labels;
  std::size_t num_samples = 0;

  std::vector<double> skill_mean;
  std::vector<Interval> skill_ci;
  ProbabilityMatrix theta_mean;     // E[theta_ij | x], zero diagonal
  ProbabilityMatrix theta_adjusted; // theta* at posterior means
  ProbabilityMatrix prob_mean;      // E[p_ij | x]
  std::vector<double> K_hist;       // posterior mass of K = 0, 1, ...
  std::vector<double> A_hist;

  Ranking by_probability;           // from prob_mean
  std::vector<Interval> p_dot_ci;
  Ranking by_ability;               // posterior mean abilities
  std::vector<Interval> ability_ci;

  std::size_t num_objects() const { return labels.size(); }
  int mode_K() const;
  int mode_A() const;
};

// Central 95% intervals come from the 2.5% and 97.5% empirical quantiles.
PosteriorSummary summarize(std::span<const ModelState> samples, const ComparisonDataset& data,
                           const BtFit& bt);

enum class PredictionMode {
  kPosteriorMeanProbability,  // average of per-sample p_ij
  kPlugIn,                    // p at posterior-mean theta and skills
};
ProbabilityMatrix predictive_matrix(const PosteriorSummary& summary,
                                    PredictionMode mode = PredictionMode::kPosteriorMeanProbability);

// Maps the largest value to 1 and the smallest to 0; nullopt when all values
// coincide.
std::optional<std::vector<double>> scale_unit(std::span<const double> values);

}  // namespace icbt
