#include "icbt/pipeline.h"

#include <cmath>
#include <future>
#include <stdexcept>

#include "icbt/math.h"

namespace icbt {

double gelman_rubin(const std::vector<std::vector<double>>& traces) {
  const std::size_t m = traces.size();
  if (m < 2) return 1.0;
  const std::size_t n = traces.front().size();
  for (const auto& t : traces) {
    if (t.size() != n) throw std::invalid_argument("traces differ in length");
  }
  if (n < 2) return 1.0;
  std::vector<double> means(m);
  double grand = 0.0;
  double W = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double x : traces[j]) s += x;
    means[j] = s / static_cast<double>(n);
    grand += means[j] / static_cast<double>(m);
    double v = 0.0;
    for (double x : traces[j]) v += (x - means[j]) * (x - means[j]);
    W += v / static_cast<double>(n - 1) / static_cast<double>(m);
  }
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= static_cast<double>(n) / static_cast<double>(m - 1);
  if (W <= 0.0) return B > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (static_cast<double>(n - 1) / static_cast<double>(n)) * W + B / static_cast<double>(n);
  return std::sqrt(var_plus / W);
}

FitResult fit_icbt(const ComparisonDataset& data, const FitConfig& config, std::uint64_t seed) {
  if (config.chains < 1) throw std::invalid_argument("at least one chain is required");
  FitResult out;
  out.h = config.default_hyperparameters ? Hyperparameters::defaults_for(data.num_objects()) : config.h;
  out.h.validate();
  config.schedule.validate();

  const auto constraints = PairConstraints::for_dataset(data);
  BtOptions bo = config.bt;
  bo.reference = constraints->reference();
  out.bt = fit_bt_mle(data, bo);
  out.init = select_by_bic(data, out.bt, config.init, seed);
  const WarmupResult warm = staged_warmup(out.init.state, data, out.h, config.init, seed,
                                           config.schedule.rw_step_theta, config.schedule.rw_step_phi);

  SamplerSchedule sched = config.schedule;
  sched.rw_step_theta = warm.step_theta;
  sched.rw_step_phi = warm.step_phi;
  std::vector<std::future<ChainSamples>> jobs;
  for (int c = 0; c < config.chains; ++c) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(c);
    jobs.push_back(std::async(std::launch::async, [&, s] { return run_chain(warm.state, data, out.h, sched, s); }));
  }
  for (auto& j : jobs) out.chains.push_back(j.get());

  std::vector<std::vector<double>> traces;
  for (const auto& ch : out.chains) {
    out.pooled.insert(out.pooled.end(), ch.states.begin(), ch.states.end());
    std::vector<double> kept;
    for (std::size_t it = static_cast<std::size_t>(sched.burn_in); it < ch.log_posterior.size(); ++it) {
      kept.push_back(ch.log_posterior[it]);
    }
    traces.push_back(std::move(kept));
  }
  out.gelman_rubin = gelman_rubin(traces);
  return out;
}

double prediction_accuracy(std::span<const double> predictions, const ComparisonDataset& test) {
  if (predictions.size() != test.size()) throw std::invalid_argument("one prediction per comparison required");
  if (test.empty()) return 0.0;
  double good = 0.0;
  const auto comps = test.comparisons();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const double p_winner = comps[c].first_won ? predictions[c] : 1.0 - predictions[c];
    if (p_winner > 0.5) {
      good += 1.0;
    } else if (p_winner == 0.5) {
      good += 0.5;
    }
  }
  return good / static_cast<double>(comps.size());
}

SplitMetrics evaluate_split(const ComparisonDataset& train, const ComparisonDataset& test,
                            const FitConfig& config, std::uint64_t seed, PredictionMode mode) {
  const FitResult fit = fit_icbt(train, config, seed);
  const PosteriorSummary summary = summarize(fit.pooled, train, fit.bt);
  const auto p_icbt = predict(predictive_matrix(summary, mode), test);
  const auto p_bt = predict(bt_pairwise_probabilities(fit.bt), test);
  SplitMetrics m;
  m.log_loss_icbt = log_loss(p_icbt, test);
  m.log_loss_bt = log_loss(p_bt, test);
  m.relative_log_loss = relative_log_loss(m.log_loss_icbt, m.log_loss_bt);
  m.accuracy_icbt = prediction_accuracy(p_icbt, test);
  m.accuracy_bt = prediction_accuracy(p_bt, test);
  m.ranking_accuracy_probability = ranking_accuracy(summary.by_probability.order, test);
  m.ranking_accuracy_ability = ranking_accuracy(summary.by_ability.order, test);
  m.ranking_accuracy_bt = ranking_accuracy(rank_by_score(fit.bt.r_bt).order, test);
  return m;
}

}  // namespace icbt
