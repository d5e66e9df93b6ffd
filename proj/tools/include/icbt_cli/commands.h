#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "icbt/dataset.h"
#include "icbt_cli/config.h"

namespace icbt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitConvergenceWarning = 3;
inline constexpr int kExitInternalError = 4;

// Dataset from a comparison CSV, optionally restricted to one season. An
// empty file with `objects` set yields that many numbered objects and no
// comparisons, which makes `fit` sample the prior.
ComparisonDataset load_dataset(const std::filesystem::path& path, const std::optional<std::string>& season,
                               std::optional<std::size_t> objects = std::nullopt);

// Comparisons of `data` re-indexed against the objects of `reference`.
// Throws DataError naming a label that `reference` lacks.
ComparisonDataset reindex(const ComparisonDataset& data, const ComparisonDataset& reference);

// Each command writes its outputs plus the effective config (config.toml)
// into out_dir and returns an exit code. Errors propagate as exceptions.

// comparisons.csv and truth.json for the configured scenario.
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

// samples.jsonl and summary.json. Returns kExitConvergenceWarning when
// several chains disagree beyond the R-hat threshold.
int cmd_fit(const RunConfig& config, const ComparisonDataset& data, const std::filesystem::path& out_dir);

// summary.json from stored samples.
int cmd_summarize(const RunConfig& config, const std::filesystem::path& samples,
                  const ComparisonDataset& data, const std::filesystem::path& out_dir);

// metrics.json. Without a test set every replicate draws a fresh random
// split; with one, replicates refit the same split under new seeds.
int cmd_evaluate(const RunConfig& config, const ComparisonDataset& train,
                 const std::optional<ComparisonDataset>& test, const std::filesystem::path& out_dir);

// rankings.csv, with a readable table on `out`.
int cmd_rank(const RunConfig& config, const std::filesystem::path& summary,
             const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace icbt::cli
