#include "icbt_cli/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "icbt/bt.h"
#include "icbt/errors.h"
#include "icbt/evaluation.h"
#include "icbt/io.h"
#include "icbt/pipeline.h"
#include "icbt/sampler.h"
#include "icbt/simulator.h"

namespace icbt::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

Provenance provenance(const RunConfig& config) { return {digest_of(config), config.seed}; }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

// Creates out_dir and records the effective configuration in it.
void prepare(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create '" + out_dir.string() + "': " + ec.message());
  auto out = open_output(out_dir / "config.toml");
  out << "# config_digest=" << digest_of(config) << " seed=" << config.seed << '\n'
      << canonical_config(config);
}

BtFit baseline_for(const ComparisonDataset& data, const RunConfig& config) {
  BtOptions bo = config.fit.bt;
  bo.reference = PairConstraints::for_dataset(data)->reference();
  return fit_bt_mle(data, bo);
}

Diagnostics fit_diagnostics(const FitResult& fit, const FitConfig& fc, const ComparisonDataset& data) {
  Diagnostics d;
  d["num_objects"] = static_cast<double>(data.num_objects());
  d["num_comparisons"] = static_cast<double>(data.size());
  d["chains"] = fc.chains;
  d["iterations"] = static_cast<double>(fc.schedule.iterations);
  d["burn_in"] = static_cast<double>(fc.schedule.burn_in);
  d["thin"] = static_cast<double>(fc.schedule.thin);
  d["gelman_rubin"] = fit.gelman_rubin;
  d["lambda_A"] = fit.h.lambda_A;
  d["bt_loglik"] = fit.bt.loglik;
  d["bt_converged"] = fit.bt.converged ? 1.0 : 0.0;
  d["init_K"] = fit.init.state.K();
  d["init_A"] = fit.init.state.A();
  for (std::size_t k = 0; k < kNumMoveKinds; ++k) {
    MoveStats total;
    for (const auto& ch : fit.chains) {
      total.attempted += ch.stats[k].attempted;
      total.accepted += ch.stats[k].accepted;
    }
    const std::string name(move_kind_name(static_cast<MoveKind>(k)));
    d["attempted." + name] = static_cast<double>(total.attempted);
    d["acceptance." + name] = total.rate();
  }
  for (std::size_t c = 0; c < fit.chains.size(); ++c) {
    d["chain" + std::to_string(c) + ".step_theta"] = fit.chains[c].final_step_theta;
    d["chain" + std::to_string(c) + ".step_phi"] = fit.chains[c].final_step_phi;
  }
  return d;
}

Interval percentile_interval(const std::vector<double>& values, double level) {
  const double tail = 0.5 * (1.0 - level);
  return {empirical_quantile(values, tail), empirical_quantile(values, 1.0 - tail)};
}

json metrics_json(const SplitMetrics& m) {
  return json{{"log_loss_icbt", m.log_loss_icbt},
              {"log_loss_bt", m.log_loss_bt},
              {"negative_relative_log_loss", m.relative_log_loss},
              {"accuracy_icbt", m.accuracy_icbt},
              {"accuracy_bt", m.accuracy_bt},
              {"ranking_accuracy_probability", m.ranking_accuracy_probability},
              {"ranking_accuracy_ability", m.ranking_accuracy_ability},
              {"ranking_accuracy_bt", m.ranking_accuracy_bt}};
}

std::string fmt_double(double x, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << x;
  return s.str();
}

}  // namespace

ComparisonDataset load_dataset(const fs::path& path, const std::optional<std::string>& season,
                               std::optional<std::size_t> objects) {
  ComparisonDataset data = load_comparisons_csv(path.string());
  if (season) {
    data = data.filter_season(*season);
    if (data.empty()) throw DataError("no comparisons in season '" + *season + "'");
  }
  if (objects) {
    if (!data.empty()) throw DataError("--objects applies only to a dataset without comparisons");
    data = ComparisonDataset(ObjectIndex::numbered(*objects), {});
  }
  return data;
}

ComparisonDataset reindex(const ComparisonDataset& data, const ComparisonDataset& reference) {
  std::vector<Comparison> comps;
  comps.reserve(data.size());
  for (const Comparison& c : data.comparisons()) {
    comps.push_back({reference.objects().at(data.objects().label(c.first)),
                     reference.objects().at(data.objects().label(c.second)), c.first_won});
  }
  return ComparisonDataset(reference.objects(), std::move(comps), data.seasons());
}

int cmd_simulate(const RunConfig& config, const fs::path& out_dir) {
  prepare(config, out_dir);
  const Provenance prov = provenance(config);
  const ModelState truth = scenario_preset(config.simulate.scenario, config.seed, config.simulate.skill_sd);
  const TournamentSpec spec{truth.num_objects(), config.simulate.rounds, config.seed + 1000};
  const ComparisonDataset data = simulate_round_robin(truth, spec);
  {
    auto out = open_output(out_dir / "comparisons.csv");
    write_comparisons_csv(out, data, &prov);
  }
  auto out = open_output(out_dir / "truth.json");
  write_state_json(out, truth, prov, data.objects().labels());
  spdlog::info("scenario {} with {} round robins: {} comparisons among {} objects", config.simulate.scenario,
               config.simulate.rounds, data.size(), data.num_objects());
  return kExitOk;
}

int cmd_fit(const RunConfig& config, const ComparisonDataset& data, const fs::path& out_dir) {
  prepare(config, out_dir);
  const Provenance prov = provenance(config);
  const FitConfig fc = config.fit_for(data.num_objects());
  if (data.empty()) spdlog::info("no comparisons: sampling the prior");
  const FitResult fit = fit_icbt(data, fc, config.seed);
  {
    auto out = open_output(out_dir / "samples.jsonl");
    write_samples_jsonl(out, fit.pooled, prov);
  }
  const PosteriorSummary summary = summarize(fit.pooled, data, fit.bt);
  {
    auto out = open_output(out_dir / "summary.json");
    write_summary_json(out, summary, prov, fit_diagnostics(fit, fc, data));
  }
  spdlog::info("{} samples; posterior mode K = {}, A = {}", summary.num_samples, summary.mode_K(),
               summary.mode_A());
  if (fc.chains > 1 && !(fit.gelman_rubin <= config.rhat_threshold)) {
    spdlog::warn("chains disagree: R-hat {:.4f} exceeds {:.2f}", fit.gelman_rubin, config.rhat_threshold);
    return kExitConvergenceWarning;
  }
  return kExitOk;
}

int cmd_summarize(const RunConfig& config, const fs::path& samples, const ComparisonDataset& data,
                  const fs::path& out_dir) {
  auto in = open_input(samples);
  const std::vector<ModelState> states = read_samples_jsonl(in);
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s].num_objects() != data.num_objects()) {
      throw DataError("samples line " + std::to_string(s + 1) + " has " +
                      std::to_string(states[s].num_objects()) + " objects, the data " +
                      std::to_string(data.num_objects()));
    }
  }
  prepare(config, out_dir);
  const PosteriorSummary summary = summarize(states, data, baseline_for(data, config));
  auto out = open_output(out_dir / "summary.json");
  write_summary_json(out, summary, provenance(config),
                     {{"num_objects", static_cast<double>(data.num_objects())},
                      {"num_comparisons", static_cast<double>(data.size())}});
  return kExitOk;
}

int cmd_evaluate(const RunConfig& config, const ComparisonDataset& train,
                 const std::optional<ComparisonDataset>& test, const fs::path& out_dir) {
  prepare(config, out_dir);
  const EvaluateConfig& ev = config.evaluate;
  const FitConfig fc = config.fit_for(train.num_objects());
  std::optional<ComparisonDataset> fixed_test;
  if (test) fixed_test = reindex(*test, train);

  std::vector<SplitMetrics> runs;
  json replicates = json::array();
  for (int r = 0; r < ev.replicates; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    SplitMetrics m;
    if (fixed_test) {
      m = evaluate_split(train, *fixed_test, fc, seed, ev.prediction);
    } else {
      const auto [tr, te] = train_test_split(train, ev.train_fraction, seed);
      m = evaluate_split(tr, te, fc, seed, ev.prediction);
    }
    json row = metrics_json(m);
    row["seed"] = seed;
    replicates.push_back(row);
    runs.push_back(m);
    spdlog::info("replicate {}/{}: negative relative log-loss {:+.5f}", r + 1, ev.replicates, m.relative_log_loss);
  }

  json summary = json::object();
  const json names = metrics_json(runs.front());
  for (const auto& [name, first] : names.items()) {
    std::vector<double> values;
    for (const auto& row : replicates) values.push_back(row.at(name).get<double>());
    double mean = 0.0;
    for (double v : values) mean += v / static_cast<double>(values.size());
    const Interval ci = percentile_interval(values, ev.ci_level);
    summary[name] = json{{"mean", mean}, {"ci", {ci.lo, ci.hi}}};
  }
  const Provenance prov = provenance(config);
  json doc{{"config_digest", prov.config_digest},
           {"seed", prov.seed},
           {"replicates", ev.replicates},
           {"split", fixed_test ? "fixed" : "random"},
           {"ci_level", ev.ci_level},
           {"metrics", summary},
           {"replicate_metrics", replicates}};
  auto out = open_output(out_dir / "metrics.json");
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_rank(const RunConfig& config, const fs::path& summary_path, const fs::path& out_dir, std::ostream& out) {
  auto in = open_input(summary_path);
  const PosteriorSummary s = read_summary_json(in);
  prepare(config, out_dir);
  const std::size_t n = s.num_objects();

  const auto scaled = scale_unit(s.by_ability.score);
  if (!scaled) spdlog::warn("abilities coincide across all {} objects; scaling skipped", n);
  double lo = 0.0;
  double span = 1.0;
  if (scaled) {
    lo = *std::min_element(s.by_ability.score.begin(), s.by_ability.score.end());
    span = *std::max_element(s.by_ability.score.begin(), s.by_ability.score.end()) - lo;
  }

  std::optional<SpearmanResult> rho;
  if (n >= 3 && scaled && scale_unit(s.by_probability.score)) {
    rho = spearman_comparison(s.by_probability.score, s.by_ability.score, config.evaluate.spearman_permutations,
                              config.seed);
  }

  const Provenance prov = provenance(config);
  auto csv = open_output(out_dir / "rankings.csv");
  csv << "# config_digest=" << prov.config_digest << " seed=" << prov.seed << '\n';
  if (rho) csv << "# spearman_rho=" << rho->rho << " p_value=" << rho->p_value << '\n';
  csv << "method,rank,label,score,ci_lo,ci_hi,scaled,scaled_ci_lo,scaled_ci_hi\n";

  const auto emit = [&](const char* method, const Ranking& rk, const std::vector<Interval>& ci, bool scale) {
    out << (scale ? "Ranking by ability" : "Ranking by average win probability") << '\n';
    out << "  rank  label                 score     95% interval" << (scale && scaled ? "          scaled" : "")
        << '\n';
    for (std::size_t pos = 0; pos < rk.order.size(); ++pos) {
      const std::size_t i = rk.order[pos];
      const double x = rk.score[i];
      csv << method << ',' << pos + 1 << ',' << s.labels[i] << ',' << x << ',' << ci[i].lo << ',' << ci[i].hi;
      out << "  " << std::setw(4) << pos + 1 << "  " << std::left << std::setw(18) << s.labels[i] << std::right
          << std::setw(9) << fmt_double(x) << "  [" << fmt_double(ci[i].lo) << ", " << fmt_double(ci[i].hi) << ']';
      if (scale && scaled) {
        csv << ',' << (x - lo) / span << ',' << (ci[i].lo - lo) / span << ',' << (ci[i].hi - lo) / span;
        out << "  " << std::setw(8) << fmt_double((x - lo) / span, 3);
      } else {
        csv << ",,,";
      }
      csv << '\n';
      out << '\n';
    }
  };
  emit("probability", s.by_probability, s.p_dot_ci, false);
  out << '\n';
  emit("ability", s.by_ability, s.ability_ci, true);
  if (rho) {
    out << "\nSpearman correlation between the two rankings: " << fmt_double(rho->rho) << " (permutation p = "
        << fmt_double(rho->p_value) << ")\n";
  }
  return kExitOk;
}

}  // namespace icbt::cli
