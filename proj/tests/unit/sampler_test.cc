#include "icbt/sampler.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "icbt/errors.h"
#include "icbt/priors.h"
#include "test_util.h"

namespace icbt {
namespace {

// sqrt(N) * sup |F_N - F| for the sample against a continuous cdf.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return std::sqrt(n) * d;
}
constexpr double kKsCritical1Pct = 1.628;

// Thinned heavily enough that the kept draws are close to independent.
SamplerSchedule levels_schedule(long kept) {
  SamplerSchedule s;
  s.moves = MoveProbabilities::levels_only();
  s.thin = 100;
  s.iterations = kept * s.thin;
  s.burn_in = 2000;
  return s;
}

ComparisonDataset no_data(std::size_t n) { return ComparisonDataset(ObjectIndex::numbered(n), {}); }

TEST(ThetaLevelUpdate, PriorOnlyMarginalIsGamma) {
  auto data = no_data(3);
  ModelState init(PairConstraints::star(3, 0));
  init.mutable_intrans().levels = {0.5};
  Hyperparameters h = Hyperparameters::defaults_for(3);
  auto chain = run_chain(init, data, h, levels_schedule(100'000), 17);
  std::vector<double> theta;
  for (const auto& s : chain.states) theta.push_back(s.intrans().levels.at(0));
  ASSERT_EQ(theta.size(), 100'000u);
  const double ks = ks_statistic(theta, [&](double x) { return boost::math::gamma_p(h.alpha, h.beta * x); });
  EXPECT_LT(ks, kKsCritical1Pct);
}

TEST(PhiLevelUpdate, PriorOnlyMarginalIsHalfNormal) {
  auto data = no_data(3);
  ModelState init(PairConstraints::star(3, 0));
  init.mutable_skills().levels = {0.0, 1.0};
  Hyperparameters h = Hyperparameters::defaults_for(3);
  auto chain = run_chain(init, data, h, levels_schedule(100'000), 18);
  std::vector<double> phi;
  for (const auto& s : chain.states) {
    ASSERT_EQ(s.skills().levels[0], 0.0);
    phi.push_back(s.skills().levels.at(1));
  }
  const double ks =
      ks_statistic(phi, [&](double x) { return boost::math::erf(x / (h.nu_A * std::sqrt(2.0))); });
  EXPECT_LT(ks, kKsCritical1Pct);
}

TEST(ThetaLevelUpdate, VanishingStepIsAlwaysAccepted) {
  std::mt19937_64 rng(1);
  auto st = testing::random_state(4, 2, 1, rng);
  auto data = testing::random_dataset(4, 30, rng);
  Sampler s(data, Hyperparameters::defaults_for(4), SamplerSchedule{}, st, 5);
  int accepted = 0;
  for (int t = 0; t < 1000; ++t) accepted += s.update_theta_level(1 + t % 2, 1e-9);
  EXPECT_GE(accepted, 999);
  EXPECT_THROW(s.update_theta_level(3, 0.5), std::out_of_range);
  EXPECT_THROW(s.update_phi_level(0, 0.5), std::invalid_argument);
}

TEST(LevelUpdates, OrderingAndPinnedZeroSurvive) {
  std::mt19937_64 rng(2);
  auto data = testing::random_dataset(6, 60, rng);
  Sampler s(data, Hyperparameters::defaults_for(6), SamplerSchedule{}, testing::random_state(6, 3, 4, rng),
            6);
  const std::size_t ref = s.state().constraints().reference();
  for (int t = 0; t < 100'000; ++t) {
    s.update_all_levels();
    if (t % 1000 == 0) {
      ASSERT_NO_THROW(s.state().validate());
      ASSERT_EQ(s.state().skill(ref), 0.0);
    }
  }
}

TEST(GibbsPair, FlatLikelihoodGivesDmaPredictive) {
  auto data = no_data(4);
  auto c = PairConstraints::star(4, 0);
  ModelState st(c);
  auto& z = st.mutable_intrans();
  z.levels = {0.4, 0.9};
  z.label[pair_id(3, 1)] = 1;
  z.label[pair_id(3, 2)] = 1;
  Hyperparameters h = Hyperparameters::defaults_for(4);
  Sampler s(data, h, SamplerSchedule{}, st, 7);
  const std::size_t pid = pair_id(2, 1);
  std::vector<int> count(5, 0);
  const int draws = 100'000;
  for (int t = 0; t < draws; ++t) {
    s.reallocate_pair(pid);
    ++count[s.state().intrans().label[pid] + 2];
  }
  // gamma_K + occupancy of the other two pairs, both at label 1.
  const std::vector<double> w{1, 1, 1, 3, 1};
  double chi2 = 0.0;
  for (int l = 0; l < 5; ++l) {
    const double expect = w[l] / 7.0;
    EXPECT_NEAR(static_cast<double>(count[l]) / draws, expect, 0.02) << "label " << l - 2;
    chi2 += std::pow(count[l] - draws * expect, 2) / (draws * expect);
  }
  EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(boost::math::chi_squared(4.0), 0.01)));
  EXPECT_EQ(s.state().intrans().label[pair_id(3, 1)], 1);
  EXPECT_THROW(s.reallocate_pair(pair_id(1, 0)), std::invalid_argument);
}

TEST(GibbsPair, OverwhelmingLikelihoodIsDeterministic) {
  auto data = testing::tally_dataset(3, {{2, 1, 200}});
  ModelState st(PairConstraints::star(3, 0));
  st.mutable_intrans().levels = {3.0};
  Sampler s(data, Hyperparameters::defaults_for(3), SamplerSchedule{}, st, 8);
  for (int t = 0; t < 100'000; ++t) {
    s.reallocate_pair(pair_id(2, 1));
    ASSERT_EQ(s.state().intrans().label[pair_id(2, 1)], 1);
  }
}

TEST(GibbsPair, NoOpWhenKIsZero) {
  auto data = no_data(3);
  Sampler s(data, Hyperparameters::defaults_for(3), SamplerSchedule{}, ModelState(PairConstraints::star(3, 0)),
            9);
  for (int t = 0; t < 100; ++t) s.reallocate_pair(pair_id(2, 1));
  EXPECT_EQ(s.state().intrans().label[pair_id(2, 1)], 0);
}

TEST(GibbsObject, FlatLikelihoodGivesDmaPredictive) {
  auto data = no_data(5);
  ModelState st(PairConstraints::star(5, 0));
  auto& y = st.mutable_skills();
  y.levels = {-0.8, 0.0, 0.6};
  y.zero_position = 1;
  y.position = {1, 1, 2, 2, 0};
  Sampler s(data, Hyperparameters::defaults_for(5), SamplerSchedule{}, st, 10);
  std::vector<int> count(3, 0);
  const int draws = 100'000;
  for (int t = 0; t < draws; ++t) {
    s.reallocate_object(1);
    ++count[s.state().skills().position[1]];
  }
  // gamma_A + occupancy among objects 2..4 at labels (1, 1, -1).
  const std::vector<double> w{2, 1, 3};
  double chi2 = 0.0;
  for (int l = 0; l < 3; ++l) {
    const double expect = w[l] / 6.0;
    EXPECT_NEAR(static_cast<double>(count[l]) / draws, expect, 0.02) << "label " << l - 1;
    chi2 += std::pow(count[l] - draws * expect, 2) / (draws * expect);
  }
  EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(boost::math::chi_squared(2.0), 0.01)));
  EXPECT_THROW(s.reallocate_object(0), std::invalid_argument);
}

TEST(GibbsObject, NoOpWhenAIsZero) {
  auto data = no_data(3);
  Sampler s(data, Hyperparameters::defaults_for(3), SamplerSchedule{}, ModelState(PairConstraints::star(3, 0)),
            11);
  for (int t = 0; t < 100; ++t) s.reallocate_object(2);
  EXPECT_EQ(s.state().skills().position[2], 0u);
}

void expect_same_state(const ModelState& a, const ModelState& b) {
  ASSERT_EQ(a.K(), b.K());
  ASSERT_EQ(a.A(), b.A());
  for (int k = 0; k < a.K(); ++k) EXPECT_NEAR(a.intrans().levels[k], b.intrans().levels[k], 1e-9);
  for (int p = 0; p <= a.A(); ++p) EXPECT_NEAR(a.skills().levels[p], b.skills().levels[p], 1e-9);
  EXPECT_EQ(a.intrans().label, b.intrans().label);
  EXPECT_EQ(a.skills().position, b.skills().position);
  EXPECT_EQ(a.skills().zero_position, b.skills().zero_position);
}

TEST(ThetaSplit, MergeOfSplitRestoresState) {
  std::mt19937_64 rng(12);
  std::exponential_distribution<double> ud(1.0);
  for (int t = 0; t < 300; ++t) {
    auto st = testing::random_state(5, t % 4, 1, rng);
    const int level = std::uniform_int_distribution<int>(0, st.K())(rng);
    auto split = propose_theta_split(st, level, ud(rng) + 1e-3, 1.0, rng);
    if (!split.valid) continue;
    ASSERT_NO_THROW(split.state.validate());
    ASSERT_EQ(split.state.K(), st.K() + 1);
    auto merge = propose_theta_merge(split.state, level, 1.0);
    ASSERT_TRUE(merge.valid);
    expect_same_state(merge.state, st);
    EXPECT_NEAR(merge.log_proposal_ratio, -split.log_proposal_ratio, 1e-8);
  }
}

TEST(ThetaSplit, DegenerateAuxiliaryLeavesLevelsEqual) {
  std::mt19937_64 rng(13);
  auto st = testing::random_state(5, 3, 0, rng);
  const double level2 = st.intrans().levels[1];
  auto split = propose_theta_split(st, 2, 1e-12, 1.0, rng);
  ASSERT_TRUE(split.valid);
  EXPECT_NEAR(split.state.intrans().levels[1], level2, 1e-9);
  EXPECT_NEAR(split.state.intrans().levels[2], level2, 1e-9);
}

TEST(PhiSplit, MergeOfSplitRestoresState) {
  std::mt19937_64 rng(14);
  std::exponential_distribution<double> ud(1.0);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    auto st = testing::random_state(6, 1, t % 4, rng);
    const auto pos = std::uniform_int_distribution<std::size_t>(0, st.A())(rng);
    const int dir = t % 2 ? 1 : -1;
    auto split = propose_phi_split(st, pos, dir, ud(rng) + 1e-3, 1.0, rng);
    if (!split.valid) continue;
    ASSERT_NO_THROW(split.state.validate());
    ASSERT_EQ(split.state.A(), st.A() + 1);
    const std::size_t ref = st.constraints().reference();
    EXPECT_EQ(split.state.skill(ref), 0.0);
    auto merge = propose_phi_merge(split.state, pos, 1.0);
    ASSERT_TRUE(merge.valid);
    expect_same_state(merge.state, st);
    EXPECT_NEAR(merge.log_proposal_ratio, -split.log_proposal_ratio, 1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 300);
}

TEST(Merge, InfeasibleAtZeroDimension) {
  auto data = no_data(3);
  Sampler s(data, Hyperparameters::defaults_for(3), SamplerSchedule{}, ModelState(PairConstraints::star(3, 0)),
            15);
  EXPECT_FALSE(s.merge_intransitivity());
  EXPECT_FALSE(s.merge_skill());
  EXPECT_FALSE(s.delete_empty_intransitivity());
  EXPECT_EQ(s.stats()[static_cast<std::size_t>(MoveKind::kMergeTheta)].attempted, 0);
  EXPECT_FALSE(propose_theta_merge(s.state(), 0, 1.0).valid);
}

TEST(DeleteEmpty, OccupiedMirrorIsNotDeleted) {
  auto data = no_data(3);
  ModelState st(PairConstraints::star(3, 0));
  st.mutable_intrans().levels = {0.6};
  st.mutable_intrans().label[pair_id(2, 1)] = -1;
  Sampler s(data, Hyperparameters::defaults_for(3), SamplerSchedule{}, st, 16);
  for (int t = 0; t < 1000; ++t) {
    s.delete_empty_intransitivity();
    ASSERT_EQ(s.state().K(), 1);
  }
}

TEST(RunChain, FullScheduleKeepsInvariantsAndReference) {
  std::mt19937_64 rng(19);
  auto data = testing::random_dataset(6, 80, rng);
  auto c = PairConstraints::for_dataset(data);
  SamplerSchedule sch;
  sch.iterations = 100'000;
  sch.burn_in = 0;
  sch.thin = 1000;
  sch.validate_each_move = true;
  auto chain = run_chain(ModelState(c), data, Hyperparameters::defaults_for(6), sch, 3);
  EXPECT_EQ(chain.states.size(), 100u);
  EXPECT_EQ(chain.log_posterior.size(), 100'000u);
  for (const auto& s : chain.states) EXPECT_EQ(s.skill(c->reference()), 0.0);
  long total = 0;
  for (const auto& m : chain.stats) total += m.accepted;
  EXPECT_GT(total, 0);
}

TEST(RunChain, SameSeedSameOutput) {
  std::mt19937_64 rng(20);
  auto data = testing::random_dataset(5, 40, rng);
  ModelState init(PairConstraints::for_dataset(data));
  SamplerSchedule sch;
  sch.iterations = 5000;
  sch.burn_in = 1000;
  const auto h = Hyperparameters::defaults_for(5);
  auto a = run_chain(init, data, h, sch, 99);
  auto b = run_chain(init, data, h, sch, 99);
  EXPECT_EQ(a.log_posterior, b.log_posterior);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    EXPECT_EQ(a.states[i].intrans().levels, b.states[i].intrans().levels);
    EXPECT_EQ(a.states[i].skills().levels, b.states[i].skills().levels);
  }
  auto other = run_chain(init, data, h, sch, 100);
  EXPECT_NE(a.log_posterior, other.log_posterior);
}

TEST(RunChain, ZeroIterations) {
  std::mt19937_64 rng(21);
  auto data = testing::random_dataset(4, 10, rng);
  auto init = testing::random_state(4, 1, 1, rng);
  SamplerSchedule sch;
  sch.iterations = 0;
  sch.burn_in = 0;
  auto chain = run_chain(init, data, Hyperparameters::defaults_for(4), sch, 1);
  EXPECT_TRUE(chain.states.empty());
  EXPECT_TRUE(chain.log_posterior.empty());
  expect_same_state(chain.final_state, init);
}

TEST(Schedule, Validation) {
  SamplerSchedule s;
  EXPECT_NO_THROW(s.validate());
  s.moves.reallocate = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = SamplerSchedule{};
  s.thin = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace icbt
