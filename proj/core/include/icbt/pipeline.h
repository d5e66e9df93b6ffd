#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icbt/bt.h"
#include "icbt/dataset.h"
#include "icbt/evaluation.h"
#include "icbt/initializer.h"
#include "icbt/priors.h"
#include "icbt/sampler.h"

namespace icbt {

struct FitConfig {
  Hyperparameters h;
  InitConfig init;
  SamplerSchedule schedule;
  // The reference is always taken from the data's pair constraints.
  BtOptions bt;
  int chains = 1;
  // Resets h to the defaults for the data's object count before fitting.
  bool default_hyperparameters = true;
};

struct FitResult {
  BtFit bt;
  InitSelection init;
  Hyperparameters h;
  std::vector<ChainSamples> chains;
  std::vector<ModelState> pooled;  // kept states of every chain
  double gelman_rubin = 1.0;       // on the kept log-posterior traces; 1 with one chain
};

// BT baseline, BIC initialisation, staged warmup, then `chains` independent
// chains seeded seed, seed + 1, ... run on separate threads.
FitResult fit_icbt(const ComparisonDataset& data, const FitConfig& config, std::uint64_t seed);

// Potential scale reduction factor of equal-length traces.
double gelman_rubin(const std::vector<std::vector<double>>& traces);

// Share of outcomes whose winner had predicted probability above 1/2; a
// prediction of exactly 1/2 counts as half. Predictions are P(first wins).
double prediction_accuracy(std::span<const double> predictions, const ComparisonDataset& test);

struct SplitMetrics {
  double log_loss_icbt = 0.0;
  double log_loss_bt = 0.0;
  double relative_log_loss = 0.0;  // positive: ICBT better
  double accuracy_icbt = 0.0;      // share of test outcomes predicted correctly
  double accuracy_bt = 0.0;
  double ranking_accuracy_probability = 0.0;
  double ranking_accuracy_ability = 0.0;
  double ranking_accuracy_bt = 0.0;
};

// Fits ICBT and BT on `train` and scores both on `test`.
SplitMetrics evaluate_split(const ComparisonDataset& train, const ComparisonDataset& test,
                            const FitConfig& config, std::uint64_t seed,
                            PredictionMode mode = PredictionMode::kPosteriorMeanProbability);

}  // namespace icbt
