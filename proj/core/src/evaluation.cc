#include "icbt/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "icbt/math.h"

namespace icbt {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

int histogram_mode(const std::vector<double>& h) {
  return static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
}

}  // namespace

Ranking rank_by_score(std::vector<double> score) {
  Ranking r;
  r.order.resize(score.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  r.score = std::move(score);
  return r;
}

Ranking rank_by_average_probability(const ProbabilityMatrix& p) {
  const std::size_t n = p.size();
  std::vector<double> s(n, 0.0);
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) s[i] += p(i, j);
      }
      s[i] /= static_cast<double>(n - 1);
    }
  }
  return rank_by_score(std::move(s));
}

Ranking rank_by_ability(const ModelState& state) {
  const std::size_t n = state.num_objects();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += state.theta(i, j);
    }
    a[i] = state.skill(i) + sum / static_cast<double>(n);
  }
  return rank_by_score(std::move(a));
}

ProbabilityMatrix adjusted_intransitivity(const ProbabilityMatrix& theta,
                                          std::span<const double> skills, const BtFit& bt) {
  const std::size_t n = theta.size();
  if (skills.size() != n || bt.r_bt.size() != n) {
    throw std::invalid_argument("adjusted_intransitivity: object counts differ");
  }
  ProbabilityMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      out(i, j) = theta(i, j) + (skills[i] - skills[j]) - (bt.r_bt[i] - bt.r_bt[j]);
    }
  }
  return out;
}

ProbabilityMatrix adjusted_intransitivity(const ModelState& state, const BtFit& bt) {
  const std::size_t n = state.num_objects();
  ProbabilityMatrix theta(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = state.skill(i);
    for (std::size_t j = 0; j < n; ++j) theta(i, j) = i == j ? 0.0 : state.theta(i, j);
  }
  return adjusted_intransitivity(theta, r, bt);
}

std::vector<double> predict(const ProbabilityMatrix& p, const ComparisonDataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& c : data.comparisons()) out.push_back(p(c.first, c.second));
  return out;
}

double log_loss(std::span<const double> predictions, const ComparisonDataset& test,
                std::size_t* clamped) {
  if (predictions.size() != test.size()) {
    throw std::invalid_argument("log_loss: one prediction per comparison required");
  }
  std::size_t hits = 0;
  double total = 0.0;
  const auto comps = test.comparisons();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double p = predictions[c];
    if (p < kLogLossClamp || p > 1.0 - kLogLossClamp) {
      ++hits;
      p = std::clamp(p, kLogLossClamp, 1.0 - kLogLossClamp);
    }
    total -= comps[c].first_won ? std::log(p) : std::log1p(-p);
  }
  if (clamped) *clamped = hits;
  return comps.empty() ? 0.0 : total / static_cast<double>(comps.size());
}

double relative_log_loss(double model_ll, double baseline_ll) { return baseline_ll - model_ll; }

double ranking_accuracy(std::span<const std::size_t> order, const ComparisonDataset& data) {
  std::vector<std::size_t> place(data.num_objects(), order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (order[r] < place.size()) place[order[r]] = r;
  }
  for (std::size_t p : place) {
    if (p == order.size()) throw std::invalid_argument("ranking does not cover every object");
  }
  if (data.empty()) return 0.0;
  std::size_t good = 0;
  for (const auto& c : data.comparisons()) {
    if (place[c.winner()] < place[c.loser()]) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(data.size());
}

SpearmanResult spearman_comparison(std::span<const double> rank_a, std::span<const double> rank_b,
                                   std::size_t permutations, std::uint64_t seed) {
  if (rank_a.size() != rank_b.size()) throw std::invalid_argument("rank vectors differ in length");
  const auto ra = average_ranks(rank_a);
  auto rb = average_ranks(rank_b);
  SpearmanResult res;
  res.rho = pearson(ra, rb);
  if (permutations == 0) return res;
  std::mt19937_64 rng(seed);
  std::size_t extreme = 0;
  const double obs = std::abs(res.rho) - 1e-12;
  for (std::size_t t = 0; t < permutations; ++t) {
    std::shuffle(rb.begin(), rb.end(), rng);
    if (std::abs(pearson(ra, rb)) >= obs) ++extreme;
  }
  res.p_value = static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
  return res;
}

std::pair<ComparisonDataset, ComparisonDataset> train_test_split(const ComparisonDataset& data,
                                                                 double train_fraction,
                                                                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

int PosteriorSummary::mode_K() const { return histogram_mode(K_hist); }
int PosteriorSummary::mode_A() const { return histogram_mode(A_hist); }

PosteriorSummary summarize(std::span<const ModelState> samples, const ComparisonDataset& data,
                           const BtFit& bt) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  const std::size_t n = samples.front().num_objects();
  const std::size_t S = samples.size();
  const double w = 1.0 / static_cast<double>(S);

  PosteriorSummary out;
  out.num_samples = S;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = i < data.num_objects() ? data.objects().label(i) : std::to_string(i + 1);
  }
  out.skill_mean.assign(n, 0.0);
  out.theta_mean = ProbabilityMatrix(n);
  out.prob_mean = ProbabilityMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.theta_mean(i, j) = 0.0;
      out.prob_mean(i, j) = i == j ? std::nan("") : 0.0;
    }
  }

  std::vector<std::vector<double>> skill_draws(n, std::vector<double>(S));
  std::vector<std::vector<double>> pdot_draws(n, std::vector<double>(S));
  std::vector<std::vector<double>> ability_draws(n, std::vector<double>(S));
  std::vector<double> ability_mean(n, 0.0);

  for (std::size_t s = 0; s < S; ++s) {
    const ModelState& st = samples[s];
    if (st.num_objects() != n) throw std::invalid_argument("summarize: samples differ in size");
    const auto K = static_cast<std::size_t>(st.K());
    const auto A = static_cast<std::size_t>(st.A());
    if (out.K_hist.size() <= K) out.K_hist.resize(K + 1, 0.0);
    if (out.A_hist.size() <= A) out.A_hist.resize(A + 1, 0.0);
    out.K_hist[K] += w;
    out.A_hist[A] += w;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = skill_of(st, i);
      skill_draws[i][s] = r;
      out.skill_mean[i] += w * r;
      double pdot = 0.0;
      double tsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double t = theta_of(st, i, j);
        const double p = sigmoid(t + r - skill_of(st, j));
        out.theta_mean(i, j) += w * t;
        out.prob_mean(i, j) += w * p;
        pdot += p;
        tsum += t;
      }
      pdot_draws[i][s] = n > 1 ? pdot / static_cast<double>(n - 1) : 0.0;
      ability_draws[i][s] = r + tsum / static_cast<double>(n);
      ability_mean[i] += w * ability_draws[i][s];
    }
  }
  // Exact antisymmetry and complement after floating-point accumulation.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      out.theta_mean(j, i) = -out.theta_mean(i, j);
      out.prob_mean(j, i) = 1.0 - out.prob_mean(i, j);
    }
  }

  out.skill_ci.resize(n);
  out.p_dot_ci.resize(n);
  out.ability_ci.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.skill_ci[i] = {empirical_quantile(skill_draws[i], 0.025), empirical_quantile(skill_draws[i], 0.975)};
    out.p_dot_ci[i] = {empirical_quantile(pdot_draws[i], 0.025), empirical_quantile(pdot_draws[i], 0.975)};
    out.ability_ci[i] = {empirical_quantile(ability_draws[i], 0.025),
                         empirical_quantile(ability_draws[i], 0.975)};
  }
  out.by_probability = rank_by_average_probability(out.prob_mean);
  out.by_ability = rank_by_score(ability_mean);
  if (bt.r_bt.size() == n) {
    out.theta_adjusted = adjusted_intransitivity(out.theta_mean, out.skill_mean, bt);
  }
  return out;
}

ProbabilityMatrix predictive_matrix(const PosteriorSummary& summary, PredictionMode mode) {
  if (mode == PredictionMode::kPosteriorMeanProbability) return summary.prob_mean;
  const std::size_t n = summary.num_objects();
  ProbabilityMatrix p(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p(i, j) = sigmoid(summary.theta_mean(i, j) + summary.skill_mean[i] - summary.skill_mean[j]);
    }
  }
  return p;
}

std::optional<std::vector<double>> scale_unit(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double span = *mx - lo;
  if (!(span > 0.0)) return std::nullopt;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / span;
  return out;
}

}  // namespace icbt
