#include "icbt/evaluation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "icbt/bt.h"
#include "icbt/math.h"
#include "test_util.h"

namespace icbt {
namespace {

ProbabilityMatrix bt_matrix(const std::vector<double>& r) {
  BtFit f;
  f.r_bt = r;
  return bt_pairwise_probabilities(f);
}

// Rock beats scissors beats paper beats rock, all skills 0.
ProbabilityMatrix rps_matrix() {
  ProbabilityMatrix p(3);
  p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
  p(1, 0) = p(2, 1) = p(0, 2) = 0.0;
  return p;
}

// n = 3 with skills (0, -30, 30) and theta_21 = -90: 0 > 1 > 2 > 0.
ModelState rps_state() {
  SkillClustering s;
  s.levels = {-30.0, 0.0, 30.0};
  s.zero_position = 1;
  s.position = {1, 0, 2};
  IntransitivityClustering z;
  z.levels = {90.0};
  z.label = {0, 0, -1};
  return ModelState(PairConstraints::star(3, 0), s, z);
}

TEST(RankByAverageProbability, Examples) {
  ProbabilityMatrix half(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      if (i != k) half(i, k) = 0.5;
  auto r = rank_by_average_probability(half);
  EXPECT_EQ(r.score, std::vector<double>(4, 0.5));
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1, 2, 3}));

  auto c = rank_by_average_probability(rps_matrix());
  for (double v : c.score) EXPECT_EQ(v, 0.5);

  auto b = rank_by_average_probability(bt_matrix({2, 1, 0}));
  EXPECT_EQ(b.order, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_NEAR(b.score[0], 0.5 * (sigmoid(1) + sigmoid(2)), 1e-15);
}

TEST(RankByAverageProbability, AgreesWithBtSkills) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0, 1);
  std::vector<double> r(8);
  for (auto& v : r) v = z(rng);
  auto a = rank_by_average_probability(bt_matrix(r));
  auto b = rank_by_score(r);
  EXPECT_EQ(a.order, b.order);
}

TEST(RankByAbility, Examples) {
  std::mt19937_64 rng(2);
  auto st = testing::random_state(5, 0, 3, rng);
  auto a = rank_by_ability(st);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a.score[i], st.skill(i), 1e-15);

  auto c = rank_by_ability(rps_state());
  for (double v : c.score) EXPECT_NEAR(v, 0.0, 1e-12);

  // Skills (0, 0.5, -0.2), theta_21 = 0.9: a_1 = 0.5 - 0.9/3, a_2 = -0.2 + 0.9/3.
  SkillClustering s;
  s.levels = {-0.2, 0.0, 0.5};
  s.zero_position = 1;
  s.position = {1, 2, 0};
  IntransitivityClustering z;
  z.levels = {0.9};
  z.label = {0, 0, 1};
  auto h = rank_by_ability(ModelState(PairConstraints::star(3, 0), s, z));
  EXPECT_NEAR(h.score[0], 0.0, 1e-15);
  EXPECT_NEAR(h.score[1], 0.5 - 0.3, 1e-15);
  EXPECT_NEAR(h.score[2], -0.2 + 0.3, 1e-15);
  EXPECT_EQ(h.order, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(AdjustedIntransitivity, Examples) {
  std::mt19937_64 rng(3);
  auto st = testing::random_state(5, 2, 2, rng);
  BtFit bt;
  for (std::size_t i = 0; i < 5; ++i) bt.r_bt.push_back(st.skill(i));
  auto same = adjusted_intransitivity(st, bt);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 5; ++k)
      if (i != k) EXPECT_NEAR(same(i, k), st.theta(i, k), 1e-14);

  auto flat = testing::random_state(5, 0, 2, rng);
  BtFit bt2;
  for (std::size_t i = 0; i < 5; ++i) bt2.r_bt.push_back(flat.skill(i));
  auto zero = adjusted_intransitivity(flat, bt2);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 5; ++k)
      if (i != k) EXPECT_NEAR(zero(i, k), 0.0, 1e-14);
}

TEST(AdjustedIntransitivity, EqualsLogitDifference) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0, 1);
  for (int t = 0; t < 20; ++t) {
    auto st = testing::random_state(6, 2, 3, rng);
    BtFit bt;
    for (int i = 0; i < 6; ++i) bt.r_bt.push_back(i == 0 ? 0.0 : z(rng));
    auto adj = adjusted_intransitivity(st, bt);
    auto P = pairwise_probability_matrix(st);
    auto Q = bt_pairwise_probabilities(bt);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t k = 0; k < 6; ++k)
        if (i != k) EXPECT_NEAR(adj(i, k), logit(P(i, k)) - logit(Q(i, k)), 1e-10);
  }
}

TEST(LogLoss, Examples) {
  auto d = testing::tally_dataset(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
  const std::vector<double> half(3, 0.5);
  EXPECT_NEAR(log_loss(half, d), std::log(2.0), 1e-15);

  std::size_t clamped = 0;
  const std::vector<double> perfect(3, 1.0);
  EXPECT_NEAR(log_loss(perfect, d, &clamped), 0.0, 1e-11);
  EXPECT_EQ(clamped, 3u);
  const std::vector<double> wrong(3, 0.0);
  EXPECT_NEAR(log_loss(wrong, d), -std::log(kLogLossClamp), 1e-6);

  // Winners first, except the middle one: -(log .8 + log(1 - .3) + log .6) / 3.
  ComparisonDataset m(ObjectIndex::numbered(3), {{0, 1, true}, {1, 2, false}, {2, 0, true}});
  const std::vector<double> p{0.8, 0.3, 0.6};
  EXPECT_NEAR(log_loss(p, m), -(std::log(0.8) + std::log(0.7) + std::log(0.6)) / 3.0, 1e-15);
  EXPECT_THROW(log_loss(half, m.subset(std::vector<std::size_t>{0})), std::invalid_argument);
}

TEST(RelativeLogLoss, Examples) {
  EXPECT_EQ(relative_log_loss(0.6, 0.6), 0.0);
  EXPECT_NEAR(relative_log_loss(0.650, 0.677), 0.027, 1e-12);
  EXPECT_EQ(relative_log_loss(0.3, 0.5), -relative_log_loss(0.5, 0.3));
}

TEST(RankingAccuracy, Examples) {
  auto dom = testing::tally_dataset(3, {{0, 1, 2}, {0, 2, 3}, {1, 2, 1}});
  const std::vector<std::size_t> fwd{0, 1, 2}, rev{2, 1, 0};
  EXPECT_EQ(ranking_accuracy(fwd, dom), 1.0);
  EXPECT_EQ(ranking_accuracy(rev, dom), 0.0);

  std::mt19937_64 rng(5);
  auto d = testing::random_dataset(6, 200, rng);
  const std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
  std::vector<std::size_t> reversed(order.rbegin(), order.rend());
  std::map<std::size_t, int> place;
  for (int r = 0; r < 6; ++r) place[order[r]] = r;
  int good = 0;
  for (const auto& c : d.comparisons()) good += place[c.winner()] < place[c.loser()];
  EXPECT_NEAR(ranking_accuracy(order, d), good / 200.0, 1e-15);
  EXPECT_NEAR(ranking_accuracy(reversed, d), 1.0 - good / 200.0, 1e-15);
  EXPECT_THROW(ranking_accuracy(std::vector<std::size_t>{0, 1}, d), std::invalid_argument);
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{6, 5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman_comparison(a, a, 0).rho, 1.0, 1e-15);
  EXPECT_NEAR(spearman_comparison(a, b, 0).rho, -1.0, 1e-15);

  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(10), y(10);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    std::shuffle(x.begin(), x.end(), rng);
    std::shuffle(y.begin(), y.end(), rng);
    double d2 = 0;
    for (int i = 0; i < 10; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    EXPECT_NEAR(spearman_comparison(x, y, 0).rho, 1.0 - 6.0 * d2 / (10.0 * 99.0), 1e-12);
  }
}

TEST(Spearman, PermutationPValue) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto r = spearman_comparison(a, a, 2000, 1);
  // Only the identity and its reverse are as extreme: 2 / 10! of permutations.
  EXPECT_LT(r.p_value, 0.005);
  const std::vector<double> c{3, 9, 1, 7, 5, 10, 2, 8, 4, 6};
  auto q = spearman_comparison(a, c, 2000, 1);
  EXPECT_GT(q.p_value, 0.05);
  EXPECT_EQ(q.p_value, spearman_comparison(a, c, 2000, 1).p_value);
}

TEST(TrainTestSplit, SizesAndUnion) {
  std::mt19937_64 rng(7);
  auto d = testing::random_dataset(5, 100, rng);
  auto [train, test] = train_test_split(d, 0.7, 11);
  EXPECT_EQ(train.size(), 70u);
  EXPECT_EQ(test.size(), 30u);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 5; ++k)
      if (i != k) EXPECT_EQ(train.wins(i, k) + test.wins(i, k), d.wins(i, k));

  auto [train2, test2] = train_test_split(d, 0.7, 12);
  bool differs = false;
  for (std::size_t i = 0; i < 5 && !differs; ++i)
    for (std::size_t k = 0; k < 5; ++k)
      if (i != k && train.wins(i, k) != train2.wins(i, k)) differs = true;
  EXPECT_TRUE(differs);
  EXPECT_THROW(train_test_split(d, 1.0, 1), std::invalid_argument);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(empirical_quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(empirical_quantile({0, 10}, 0.25), 2.5);
  EXPECT_THROW(empirical_quantile({}, 0.5), std::invalid_argument);
}

TEST(Summarize, SingleSampleEqualsState) {
  std::mt19937_64 rng(8);
  auto st = testing::random_state(5, 2, 2, rng);
  auto d = testing::random_dataset(5, 50, rng);
  auto bt = fit_bt_mle(d);
  std::vector<ModelState> one{st};
  auto s = summarize(one, d, bt);
  auto P = pairwise_probability_matrix(st);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(s.skill_mean[i], st.skill(i), 1e-15);
    EXPECT_NEAR(s.skill_ci[i].lo, st.skill(i), 1e-15);
    EXPECT_NEAR(s.skill_ci[i].hi, st.skill(i), 1e-15);
    for (std::size_t k = 0; k < 5; ++k) {
      if (i == k) continue;
      EXPECT_NEAR(s.theta_mean(i, k), st.theta(i, k), 1e-15);
      EXPECT_NEAR(s.prob_mean(i, k), P(i, k), 1e-14);
    }
  }
  EXPECT_EQ(s.mode_K(), 2);
  EXPECT_EQ(s.mode_A(), 2);
  EXPECT_EQ(s.labels[0], "1");
  EXPECT_THROW(summarize(std::span<const ModelState>{}, d, bt), std::invalid_argument);
}

TEST(Summarize, AveragesKeepStructure) {
  std::mt19937_64 rng(9);
  auto d = testing::random_dataset(6, 60, rng);
  auto bt = fit_bt_mle(d);
  std::vector<ModelState> draws;
  for (int t = 0; t < 40; ++t) draws.push_back(testing::random_state(6, t % 4, t % 3, rng));
  auto s = summarize(draws, d, bt);
  double kmass = 0.0;
  for (double m : s.K_hist) kmass += m;
  EXPECT_NEAR(kmass, 1.0, 1e-12);
  const auto& c = draws[0].constraints();
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_LE(s.skill_ci[i].lo, s.skill_ci[i].hi);
    EXPECT_LE(s.ability_ci[i].lo, s.ability_ci[i].hi);
    for (std::size_t k = 0; k < 6; ++k) {
      if (i == k) continue;
      EXPECT_EQ(s.theta_mean(i, k), -s.theta_mean(k, i));
      EXPECT_NEAR(s.prob_mean(i, k) + s.prob_mean(k, i), 1.0, 1e-10);
      if (c.is_fixed(pair_id(i, k))) EXPECT_EQ(s.theta_mean(i, k), 0.0);
    }
  }
}

TEST(PredictiveMatrix, Modes) {
  std::mt19937_64 rng(10);
  auto d = testing::random_dataset(4, 30, rng);
  std::vector<ModelState> draws{testing::random_state(4, 1, 1, rng), testing::random_state(4, 1, 1, rng)};
  auto s = summarize(draws, d, fit_bt_mle(d));
  auto mean = predictive_matrix(s);
  auto plug = predictive_matrix(s, PredictionMode::kPlugIn);
  EXPECT_NEAR(mean(1, 2), s.prob_mean(1, 2), 1e-15);
  EXPECT_NEAR(plug(1, 2), sigmoid(s.theta_mean(1, 2) + s.skill_mean[1] - s.skill_mean[2]), 1e-14);
  auto pred = predict(mean, d);
  EXPECT_EQ(pred.size(), d.size());
}

TEST(ScaleUnit, MapsToUnitInterval) {
  auto s = scale_unit(std::vector<double>{2.0, -1.0, 0.5});
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(*s, (std::vector<double>{1.0, 0.0, 0.5}));
  EXPECT_FALSE(scale_unit(std::vector<double>{0.3, 0.3}).has_value());
}

}  // namespace
}  // namespace icbt
