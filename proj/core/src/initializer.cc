#include "icbt/initializer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "icbt/math.h"
#include "icbt/sampler.h"

namespace icbt {

void InitConfig::validate() const {
  if (!(alpha_p > 0.0) || !(beta_p > 0.0)) throw std::invalid_argument("pseudo-counts must be positive");
  if (K_min < 0 || K_max < K_min) throw std::invalid_argument("empty K range");
  if (A_min < 0 || A_max < A_min) throw std::invalid_argument("empty A range");
  if (kmeans_restarts < 1) throw std::invalid_argument("kmeans_restarts must be >= 1");
  if (stage_lengths[0] < 0 || stage_lengths[1] < 0) throw std::invalid_argument("negative stage length");
}

ProbabilityMatrix naive_pair_probabilities(const ComparisonDataset& data, double alpha_p, double beta_p) {
  const std::size_t n = data.num_objects();
  ProbabilityMatrix p(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      p(i, k) = (data.wins(i, k) + alpha_p) / (data.total(i, k) + alpha_p + beta_p);
    }
  }
  return p;
}

ProbabilityMatrix empirical_intransitivity(const ProbabilityMatrix& naive, const ProbabilityMatrix& bt) {
  const std::size_t n = naive.size();
  if (bt.size() != n) throw std::invalid_argument("probability tables differ in size");
  ProbabilityMatrix t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t(i, i) = 0.0;
    for (std::size_t k = 0; k < i; ++k) {
      const double a = naive(i, k);
      const double b = bt(i, k);
      if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
        throw std::invalid_argument("probabilities must lie strictly inside (0, 1)");
      }
      t(i, k) = logit(a) - logit(b);
      t(k, i) = -t(i, k);
    }
  }
  return t;
}

namespace {

double lloyd(std::span<const double> x, std::vector<double>& c, std::vector<std::size_t>& a) {
  const std::size_t k = c.size();
  a.assign(x.size(), 0);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (std::abs(x[i] - c[j]) < std::abs(x[i] - c[best])) best = j;
      }
      if (best != a[i]) {
        a[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[a[i]] += x[i];
      ++cnt[a[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (cnt[j]) c[j] = sum[j] / static_cast<double>(cnt[j]);
    }
    if (!changed && iter > 0) break;
  }
  double wcss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) wcss += (x[i] - c[a[i]]) * (x[i] - c[a[i]]);
  return wcss;
}

}  // namespace

KMeansResult kmeans_1d(std::span<const double> values, int k, int restarts, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::set<double> distinct(values.begin(), values.end());
  if (static_cast<std::size_t>(k) > distinct.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(distinct.size()) + " distinct values");
  }
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    // k-means++ seeding.
    std::vector<double> c;
    c.push_back(values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)]);
    std::vector<double> d2(values.size());
    while (c.size() < static_cast<std::size_t>(k)) {
      double total = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (double cj : c) m = std::min(m, (values[i] - cj) * (values[i] - cj));
        d2[i] = m;
        total += m;
      }
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      std::size_t pick = 0;
      for (; pick + 1 < values.size(); ++pick) {
        if (d2[pick] > 0.0 && (u -= d2[pick]) < 0.0) break;
      }
      while (d2[pick] == 0.0) pick = (pick + 1) % values.size();
      c.push_back(values[pick]);
    }
    std::vector<std::size_t> a;
    const double wcss = lloyd(values, c, a);
    if (wcss < best.wcss) {
      best.centers = c;
      best.assignment = a;
      best.wcss = wcss;
    }
  }
  // Relabel so that centers increase.
  std::vector<std::size_t> order(best.centers.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return best.centers[x] < best.centers[y]; });
  std::vector<std::size_t> rank(order.size());
  std::vector<double> sorted(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = r;
    sorted[r] = best.centers[order[r]];
  }
  for (auto& x : best.assignment) x = rank[x];
  best.centers = std::move(sorted);
  return best;
}

namespace {

double loglik_with_skills(const ComparisonDataset& data, std::span<const double> r,
                          const IntransitivityClustering& z) {
  double ll = 0.0;
  const std::size_t n = data.num_objects();
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const int w_ik = data.wins(i, k);
      const int w_ki = data.wins(k, i);
      if (w_ik + w_ki == 0) continue;
      const double eta = z.level_of_label(z.label[pair_id(i, k)]) + r[i] - r[k];
      ll += w_ik * log_sigmoid(eta) + w_ki * log_sigmoid(-eta);
    }
  }
  return ll;
}

}  // namespace

InitSelection select_by_bic(const ComparisonDataset& data, const BtFit& bt, const InitConfig& config,
                            std::uint64_t seed) {
  config.validate();
  const std::size_t n = data.num_objects();
  if (bt.r_bt.size() != n) throw std::invalid_argument("BT fit does not match the data");
  auto constraints = PairConstraints::for_dataset(data);
  const std::size_t ref = constraints->reference();
  // BT skills relative to the constraint reference.
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = bt.r_bt[i] - bt.r_bt[ref];

  InitSelection sel;
  if (data.empty() || n < 2) {
    sel.state = ModelState(constraints);
    return sel;
  }
  const double log_c = std::log(static_cast<double>(data.size()));

  const ProbabilityMatrix naive = naive_pair_probabilities(data, config.alpha_p, config.beta_p);
  const ProbabilityMatrix pbt = bt_pairwise_probabilities(bt);
  const ProbabilityMatrix that = empirical_intransitivity(naive, pbt);

  const auto free = constraints->free_pairs();
  std::vector<double> abs_t;
  abs_t.reserve(free.size());
  for (auto pid : free) {
    auto [i, k] = constraints->pair_objects(pid);
    abs_t.push_back(std::abs(that(i, k)));
  }

  // Phase 1: intransitivity clusters with BT skills.
  IntransitivityClustering best_z;
  best_z.label.assign(num_pairs(n), 0);
  double best_bic = -2.0 * loglik_with_skills(data, r, best_z);
  if (config.K_min > 0) best_bic = std::numeric_limits<double>::infinity();
  for (int K = std::max(1, config.K_min); K <= config.K_max; ++K) {
    KMeansResult km;
    try {
      km = kmeans_1d(abs_t, K, config.kmeans_restarts, seed + static_cast<std::uint64_t>(K));
    } catch (const std::invalid_argument&) {
      break;
    }
    if (!(km.centers.front() > 0.0)) continue;
    IntransitivityClustering z;
    z.levels = km.centers;
    z.label.assign(num_pairs(n), 0);
    const double cut = 0.5 * km.centers.front();
    for (std::size_t f = 0; f < free.size(); ++f) {
      auto [i, k] = constraints->pair_objects(free[f]);
      if (abs_t[f] < cut) continue;
      const int lab = static_cast<int>(km.assignment[f]) + 1;
      z.label[free[f]] = that(i, k) >= 0.0 ? lab : -lab;
    }
    const double bic = -2.0 * loglik_with_skills(data, r, z) + K * log_c;
    if (bic < best_bic) {
      best_bic = bic;
      best_z = std::move(z);
    }
  }
  sel.bic_K = best_bic;

  // Phase 2: skill clusters given the chosen labels.
  const int A_cap = std::min<int>(config.A_max, static_cast<int>(n) - 1);
  double best = std::numeric_limits<double>::infinity();
  for (int A = config.A_min; A <= A_cap; ++A) {
    SkillClustering s;
    if (A == 0) {
      s.levels = {0.0};
      s.zero_position = 0;
      s.position.assign(n, 0);
    } else {
      KMeansResult km;
      try {
        km = kmeans_1d(r, A + 1, config.kmeans_restarts, seed + 1000 + static_cast<std::uint64_t>(A));
      } catch (const std::invalid_argument&) {
        break;
      }
      const std::size_t zp = km.assignment[ref];
      s.levels.clear();
      for (double c : km.centers) s.levels.push_back(c - km.centers[zp]);
      s.levels[zp] = 0.0;
      s.zero_position = zp;
      s.position = km.assignment;
    }
    ModelState st(constraints, std::move(s), best_z);
    const double bic = -2.0 * log_likelihood(st, data) + (best_z.K() + A) * log_c;
    if (bic < best) {
      best = bic;
      sel.state = std::move(st);
    }
  }
  sel.bic = best;
  if (!std::isfinite(best)) sel.state = ModelState(constraints, SkillClustering{{0.0}, 0, std::vector<std::size_t>(n, 0)}, best_z);
  return sel;
}

WarmupResult staged_warmup(const ModelState& state, const ComparisonDataset& data,
                           const Hyperparameters& h, const InitConfig& config, std::uint64_t seed,
                           double step_theta, double step_phi) {
  config.validate();
  WarmupResult out{state, {}, step_theta, step_phi};
  const MoveProbabilities stages[2] = {MoveProbabilities::levels_only(), MoveProbabilities::fixed_dimension()};
  for (int s = 0; s < 2; ++s) {
    const long len = config.stage_lengths[static_cast<std::size_t>(s)];
    if (len == 0) continue;
    SamplerSchedule sched;
    sched.moves = stages[s];
    sched.rw_step_theta = out.step_theta;
    sched.rw_step_phi = out.step_phi;
    Sampler sampler(data, h, sched, out.state, seed + static_cast<std::uint64_t>(s));
    for (long it = 0; it < len; ++it) {
      sampler.step(true);
      out.log_posterior.push_back(sampler.log_posterior());
    }
    out.state = sampler.state();
    out.step_theta = sampler.step_theta();
    out.step_phi = sampler.step_phi();
  }
  return out;
}

}  // namespace icbt
