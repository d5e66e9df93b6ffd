#include "icbt/initializer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "icbt/bt.h"
#include "icbt/simulator.h"
#include "test_util.h"

namespace icbt {
namespace {

TEST(NaiveProbabilities, BetaRegularised) {
  auto d = testing::tally_dataset(3, {{0, 1, 11}, {1, 0, 8}, {2, 0, 5}});
  auto p = naive_pair_probabilities(d, 2.0, 2.0);
  EXPECT_NEAR(p(0, 1), 13.0 / 23.0, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.56522, 5e-6);
  EXPECT_NEAR(p(1, 0), 10.0 / 23.0, 1e-15);
  EXPECT_EQ(p(1, 2), 0.5);
  EXPECT_NEAR(p(2, 0), 7.0 / 9.0, 1e-15);
  EXPECT_LT(p(2, 0), 1.0);
}

TEST(EmpiricalIntransitivity, LogOddsRatio) {
  ProbabilityMatrix naive(2), bt(2);
  naive(0, 1) = 13.0 / 23.0;
  naive(1, 0) = 10.0 / 23.0;
  bt(0, 1) = bt(1, 0) = 0.5;
  auto t = empirical_intransitivity(naive, bt);
  EXPECT_NEAR(t(0, 1), std::log(1.3), 1e-14);
  EXPECT_NEAR(t(0, 1), 0.26236, 5e-6);
  EXPECT_NEAR(t(1, 0), -t(0, 1), 1e-15);
  auto same = empirical_intransitivity(naive, naive);
  EXPECT_EQ(same(0, 1), 0.0);
  naive(1, 0) = 0.0;
  EXPECT_THROW(empirical_intransitivity(naive, bt), std::invalid_argument);
}

TEST(EmpiricalIntransitivity, AntisymmetricOnRandomTables) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  ProbabilityMatrix a(5), b(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      a(i, k) = u(rng);
      a(k, i) = 1 - a(i, k);
      b(i, k) = u(rng);
      b(k, i) = 1 - b(i, k);
    }
  auto t = empirical_intransitivity(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 5; ++k)
      if (i != k) EXPECT_NEAR(t(i, k), -t(k, i), 1e-12);
}

TEST(KMeans, SmallExamples) {
  const std::vector<double> ones{1, 1, 1};
  auto r = kmeans_1d(ones, 1, 3, 0);
  EXPECT_EQ(r.centers, std::vector<double>{1.0});
  EXPECT_EQ(r.wcss, 0.0);
  const std::vector<double> two{0, 10, 0, 10};
  r = kmeans_1d(two, 2, 3, 0);
  EXPECT_EQ(r.centers, (std::vector<double>{0.0, 10.0}));
  EXPECT_EQ(r.assignment, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_THROW(kmeans_1d(ones, 2, 3, 0), std::invalid_argument);
  EXPECT_THROW(kmeans_1d(ones, 0, 3, 0), std::invalid_argument);
}

TEST(KMeans, WcssNonIncreasingInK) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0, 1);
  std::vector<double> x(60);
  for (auto& v : x) v = z(rng);
  double prev = INFINITY;
  for (int k = 1; k <= 8; ++k) {
    auto r = kmeans_1d(x, k, 10, 3);
    EXPECT_LE(r.wcss, prev + 1e-12);
    EXPECT_TRUE(std::is_sorted(r.centers.begin(), r.centers.end()));
    prev = r.wcss;
  }
}

TEST(KMeans, DeterministicGivenSeed) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<double> x(40);
  for (auto& v : x) v = u(rng);
  auto a = kmeans_1d(x, 4, 5, 9), b = kmeans_1d(x, 4, 5, 9);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_EQ(a.assignment, b.assignment);
}

TEST(SelectByBic, ReturnsValidSymmetricState) {
  auto truth = scenario_preset(3, 5);
  auto d = simulate_round_robin(truth, {.n = 20, .m = 8, .seed = 6});
  auto bt = fit_bt_mle(d);
  auto sel = select_by_bic(d, bt, InitConfig{}, 7);
  EXPECT_NO_THROW(sel.state.validate());
  EXPECT_EQ(sel.state.skill(sel.state.constraints().reference()), 0.0);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t k = 0; k < i; ++k) EXPECT_EQ(sel.state.theta(i, k), -sel.state.theta(k, i));
  auto again = select_by_bic(d, bt, InitConfig{}, 7);
  EXPECT_EQ(again.state.intrans().label, sel.state.intrans().label);
  EXPECT_EQ(again.state.skills().levels, sel.state.skills().levels);
}

// On transitive data the selected levels only fit sampling noise, so they
// shrink as the number of round robins grows.
TEST(SelectByBic, TransitiveDataLevelsVanishWithSampling) {
  double light = 0.0, heavy = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto truth = scenario_preset(1, seed);
    for (int m : {8, 400}) {
      auto d = simulate_round_robin(truth, {.n = 20, .m = m, .seed = seed + 100});
      auto sel = select_by_bic(d, fit_bt_mle(d), InitConfig{}, seed);
      const auto& lv = sel.state.intrans().levels;
      (m == 8 ? light : heavy) += lv.empty() ? 0.0 : lv.back();
    }
  }
  EXPECT_LT(heavy, 0.3 * light);
}

TEST(SelectByBic, EmptyDataGivesZeroState) {
  ComparisonDataset d(ObjectIndex::numbered(4), {});
  auto sel = select_by_bic(d, fit_bt_mle(d), InitConfig{}, 1);
  EXPECT_EQ(sel.state.K(), 0);
  EXPECT_EQ(sel.state.A(), 0);
}

TEST(InitConfig, Validation) {
  InitConfig c;
  EXPECT_NO_THROW(c.validate());
  c.K_max = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = InitConfig{};
  c.alpha_p = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

class WarmupTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data = simulate_round_robin(scenario_preset(3, 11), {.n = 20, .m = 8, .seed = 12});
    init = select_by_bic(data, fit_bt_mle(data), InitConfig{}, 13).state;
    h = Hyperparameters::defaults_for(20);
  }
  ComparisonDataset data;
  ModelState init;
  Hyperparameters h;
};

TEST_F(WarmupTest, ZeroLengthIsIdentity) {
  InitConfig c;
  c.stage_lengths = {0, 0};
  auto w = staged_warmup(init, data, h, c, 1);
  EXPECT_EQ(w.state.intrans().levels, init.intrans().levels);
  EXPECT_EQ(w.state.skills().levels, init.skills().levels);
  EXPECT_EQ(w.state.intrans().label, init.intrans().label);
  EXPECT_TRUE(w.log_posterior.empty());
}

TEST_F(WarmupTest, FirstStageMovesOnlyLevels) {
  InitConfig c;
  c.stage_lengths = {3000, 0};
  auto w = staged_warmup(init, data, h, c, 2);
  EXPECT_EQ(w.state.intrans().label, init.intrans().label);
  EXPECT_EQ(w.state.skills().position, init.skills().position);
  EXPECT_EQ(w.state.K(), init.K());
  EXPECT_EQ(w.state.A(), init.A());
  EXPECT_EQ(w.log_posterior.size(), 3000u);
}

TEST_F(WarmupTest, SecondStageKeepsDimensions) {
  auto w = staged_warmup(init, data, h, InitConfig{}, 3);
  EXPECT_EQ(w.state.K(), init.K());
  EXPECT_EQ(w.state.A(), init.A());
  EXPECT_NO_THROW(w.state.validate());
}

TEST_F(WarmupTest, TraceImprovesFromPoorStart) {
  ModelState poor = init;
  for (auto& t : poor.mutable_intrans().levels) t *= 4.0;
  for (auto& f : poor.mutable_skills().levels) f *= 0.2;
  auto w = staged_warmup(poor, data, h, InitConfig{}, 4);
  const auto& t = w.log_posterior;
  const std::size_t tenth = t.size() / 10;
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_GE(median({t.end() - tenth, t.end()}), median({t.begin(), t.begin() + tenth}));
}

}  // namespace
}  // namespace icbt
