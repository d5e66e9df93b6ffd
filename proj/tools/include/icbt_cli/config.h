#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "icbt/evaluation.h"
#include "icbt/pipeline.h"

namespace icbt::cli {

struct SimulateConfig {
  int scenario = 1;
  int rounds = 8;
  double skill_sd = 1.0;
};

struct EvaluateConfig {
  double train_fraction = 0.7;
  int replicates = 1;
  PredictionMode prediction = PredictionMode::kPosteriorMeanProbability;
  std::size_t spearman_permutations = 10000;
  double ci_level = 0.95;
};

// Everything a command needs besides its input files.
struct RunConfig {
  std::uint64_t seed = 1;
  double rhat_threshold = 1.05;
  // Hyperparameters except lambda_A, which is n / 2 unless set.
  FitConfig fit;
  std::optional<double> lambda_A;
  SimulateConfig simulate;
  EvaluateConfig evaluate;

  // Hyperparameters for a dataset with n objects.
  Hyperparameters hyperparameters_for(std::size_t n) const;
  // FitConfig with the hyperparameters resolved for n objects.
  FitConfig fit_for(std::size_t n) const;
  // Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

// Parses TOML text. Unknown keys and wrongly typed values are errors
// (DataError, with the line when the TOML itself is malformed).
RunConfig parse_config(std::string_view text, std::string_view source = "config");
RunConfig load_config(const std::string& path);

// Every effective setting as TOML, in a fixed order. Two configs with the same
// canonical text behave identically.
std::string canonical_config(const RunConfig& config);

// FNV digest of the canonical text.
std::string digest_of(const RunConfig& config);

}  // namespace icbt::cli
