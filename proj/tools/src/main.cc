#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "icbt/errors.h"
#include "icbt_cli/commands.h"
#include "icbt_cli/config.h"

namespace {

namespace fs = std::filesystem;
using namespace icbt::cli;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<int> replicates;
  fs::path out_dir = ".";
};

RunConfig effective_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.chains) c.fit.chains = *g.chains;
  if (g.replicates) c.evaluate.replicates = *g.replicates;
  return c;
}

void dump_violation(const fs::path& out_dir, const std::string& what) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream dump(out_dir / "invariant_violation.txt");
  if (dump) {
    dump << what << '\n';
    spdlog::error("state dump written to {}", (out_dir / "invariant_violation.txt").string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intransitive clustered Bradley-Terry models for paired comparisons"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--chains", g.chains, "Independent MCMC chains")->check(CLI::PositiveNumber);
  app.add_option("--replicates", g.replicates, "Evaluation replicates")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for output files");

  std::optional<int> scenario;
  std::optional<int> rounds;
  std::optional<double> skill_sd;
  auto* simulate = app.add_subcommand("simulate", "Simulate a round-robin tournament from a preset scenario");
  simulate->add_option("--scenario", scenario, "Scenario 1..4")->check(CLI::Range(1, 4));
  simulate->add_option("--rounds", rounds, "Round robins (each pair meets this many times)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--skill-sd", skill_sd, "Spread of the true skill levels")->check(CLI::PositiveNumber);

  std::string data_path;
  std::string samples_path;
  std::string test_path;
  std::string summary_path;
  std::optional<std::string> season;
  std::optional<std::size_t> objects;

  auto* fit = app.add_subcommand("fit", "Fit the model by reversible-jump MCMC");
  fit->add_option("data", data_path, "Comparison CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--season", season, "Use only this season's comparisons");
  fit->add_option("--objects", objects, "Object count for a file without comparisons (prior-only run)");

  auto* summarize = app.add_subcommand("summarize", "Posterior summary from stored samples");
  summarize->add_option("samples", samples_path, "samples.jsonl from fit")->required()->check(CLI::ExistingFile);
  summarize->add_option("data", data_path, "Comparison CSV the samples were fitted to")
      ->required()
      ->check(CLI::ExistingFile);
  summarize->add_option("--season", season, "Use only this season's comparisons");

  auto* evaluate = app.add_subcommand("evaluate", "Out-of-sample comparison against Bradley-Terry");
  evaluate->add_option("train", data_path, "Training CSV (split at random when no test CSV is given)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("test", test_path, "Test CSV")->check(CLI::ExistingFile);
  evaluate->add_option("--season", season, "Use only this season's comparisons");

  auto* rank = app.add_subcommand("rank", "Rankings and scaled abilities from a summary");
  rank->add_option("summary", summary_path, "summary.json from fit or summarize")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitDataError;
  }

  try {
    RunConfig config = effective_config(g);
    if (*simulate) {
      if (scenario) config.simulate.scenario = *scenario;
      if (rounds) config.simulate.rounds = *rounds;
      if (skill_sd) config.simulate.skill_sd = *skill_sd;
      return cmd_simulate(config, g.out_dir);
    }
    if (*fit) return cmd_fit(config, load_dataset(data_path, season, objects), g.out_dir);
    if (*summarize) return cmd_summarize(config, samples_path, load_dataset(data_path, season), g.out_dir);
    if (*evaluate) {
      std::optional<icbt::ComparisonDataset> test;
      if (!test_path.empty()) test = load_dataset(test_path, season);
      return cmd_evaluate(config, load_dataset(data_path, season), test, g.out_dir);
    }
    if (*rank) return cmd_rank(config, summary_path, g.out_dir, std::cout);
  } catch (const icbt::DataError& e) {
    spdlog::error("{}", e.what());
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    spdlog::error("invalid setting: {}", e.what());
    return kExitDataError;
  } catch (const icbt::InvariantViolation& e) {
    spdlog::error("internal invariant violated: {}", e.what());
    dump_violation(g.out_dir, e.what());
    return kExitInternalError;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternalError;
  }
  return kExitInternalError;
}
