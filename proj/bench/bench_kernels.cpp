// Serial reference vs OpenMP kernels: ensemble simulation, loss evaluation
// and band quantiles.

#include <benchmark/benchmark.h>

#include "vie/cases.hpp"
#include "vie/loss.hpp"
#include "vie/network.hpp"
#include "vie/prediction.hpp"
#include "vie/simulator.hpp"

namespace {

using namespace vie;

ProblemSpec case1_spec(std::size_t n) {
  const auto c = make_case(CaseName::case1);
  return c.problem(1.0, 1.0, make_grid(c.t0, c.t_end, n));
}

void BM_ensemble_serial(benchmark::State& state) {
  const auto spec = case1_spec(1000);
  const auto paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble_serial(spec, paths, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ensemble_parallel(benchmark::State& state) {
  const auto spec = case1_spec(1000);
  const auto paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(spec, paths, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct LossFixture {
  LossEvaluator evaluator;
  std::vector<double> flat;

  LossFixture()
      : evaluator(make_case(CaseName::case1), data(), MlpConfig{}),
        flat(init_parameters(MlpConfig{}).flatten()) {}

  static MeasurementSet data() {
    const auto c = make_case(CaseName::case1);
    const auto g = make_grid(c.t0, c.t_end, 1000);
    const auto x = solve_fdm(c.problem(1.0, 0.0, g), sample_brownian(g, 0));
    return MeasurementSet::from_samples(subsample_measurements(x, 50));
  }
};

void BM_loss_serial(benchmark::State& state) {
  static const LossFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(f.evaluator.evaluate_serial(f.flat));
}

void BM_loss_parallel(benchmark::State& state) {
  static const LossFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(f.evaluator.evaluate(f.flat));
}

struct BandFixture {
  Ensemble ensemble = simulate_ensemble(case1_spec(1000), 1000, 3);
  TimeGrid horizon = make_grid(2.0, 3.0, 333);
};

void BM_band_serial(benchmark::State& state) {
  static const BandFixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(band_from_ensemble_serial(f.ensemble, 667, f.horizon, 0.95));
  }
}

void BM_band_parallel(benchmark::State& state) {
  static const BandFixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(band_from_ensemble(f.ensemble, 667, f.horizon, 0.95));
  }
}

}  // namespace

BENCHMARK(BM_ensemble_serial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ensemble_parallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loss_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loss_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
