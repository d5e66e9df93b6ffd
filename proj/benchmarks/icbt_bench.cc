#include <benchmark/benchmark.h>

#include <cstddef>
#include <cstdint>

#include "icbt/bt.h"
#include "icbt/initializer.h"
#include "icbt/model.h"
#include "icbt/sampler.h"
#include "icbt/simulator.h"

namespace {

// Scenario 3 truth (K = 3) replicated round robins among its 20 objects.
struct Fixture {
  icbt::ModelState truth = icbt::scenario_preset(3, 1);
  icbt::ComparisonDataset data;
  explicit Fixture(int rounds) : data(icbt::simulate_round_robin(truth, {truth.num_objects(), rounds, 2})) {}
};

void BM_LogLikelihood(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(icbt::log_likelihood(f.truth, f.data));
  st.counters["comparisons"] = static_cast<double>(f.data.size());
}
BENCHMARK(BM_LogLikelihood)->Arg(1)->Arg(8)->Arg(40);

void BM_BtFit(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(icbt::fit_bt_mle(f.data).loglik);
}
BENCHMARK(BM_BtFit)->Arg(1)->Arg(40);

// One full sweep of the move schedule from the data's own BIC initial state.
void BM_SamplerStep(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  const auto h = icbt::Hyperparameters::defaults_for(f.data.num_objects());
  const auto init = icbt::select_by_bic(f.data, icbt::fit_bt_mle(f.data), {}, 3);
  icbt::Sampler sampler(f.data, h, icbt::SamplerSchedule{}, init.state, 4);
  for (auto _ : st) sampler.step();
  benchmark::DoNotOptimize(sampler.log_posterior());
}
BENCHMARK(BM_SamplerStep)->Arg(8)->Arg(40);

void BM_BicInitializer(benchmark::State& st) {
  const Fixture f(8);
  const auto bt = icbt::fit_bt_mle(f.data);
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(icbt::select_by_bic(f.data, bt, {}, ++seed).bic);
}
BENCHMARK(BM_BicInitializer);

}  // namespace
BENCHMARK_MAIN();
