#include "spsim/analytics.hpp"
#include "spsim/counting.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

namespace {

using namespace spsim;

const PulseEnvelope kPulse = PulseEnvelope::square(std::numbers::pi, 0.1);

void BM_evolve_two_level(benchmark::State& state) {
  const SystemModel model = SystemModel::two_level(1.0);
  const double horizon = decay_horizon(model, kPulse, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evolve(model, kPulse, model.ground_state(), 0.0, horizon));
  }
}
BENCHMARK(BM_evolve_two_level);

void BM_evolve_cascade(benchmark::State& state) {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  const double horizon = decay_horizon(model, kPulse, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evolve(model, kPulse, model.ground_state(), 0.0, horizon));
  }
}
BENCHMARK(BM_evolve_cascade);

void BM_photocount_hierarchy(benchmark::State& state) {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  const int n_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(photocount_distribution(model, kPulse, 0, n_max));
  }
}
BENCHMARK(BM_photocount_hierarchy)->Arg(6)->Arg(14);

void BM_correlator_moments(benchmark::State& state) {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(correlator_moments(model, kPulse, 0));
  }
}
BENCHMARK(BM_correlator_moments);

void BM_mc_trajectories(benchmark::State& state) {
  const SystemModel model = SystemModel::two_level(1.0);
  McOptions opts;
  opts.threads = 1;
  opts.record_cap = 0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mc_trajectories(model, kPulse, 0, 1000, seed++, {}, opts));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_mc_trajectories);

void BM_hbt_analyze(benchmark::State& state) {
  PhotocountDistribution dist;
  dist.probs = {0.1, 0.85, 0.05};
  const HbtHistogram histogram = synth_histogram(dist, 100000, 1e-4, 0.05, 12.0, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hbt_g2(histogram, {}));
  }
}
BENCHMARK(BM_hbt_analyze);

void BM_synth_histogram(benchmark::State& state) {
  PhotocountDistribution dist;
  dist.probs = {0.1, 0.85, 0.05};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_histogram(dist, 20000, 1e-4, 0.05, 12.0, seed++));
  }
}
BENCHMARK(BM_synth_histogram);

}  // namespace

BENCHMARK_MAIN();
