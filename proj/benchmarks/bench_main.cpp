#include <benchmark/benchmark.h>

#include "cpl/confseq.hpp"
#include "cpl/detectors.hpp"
#include "cpl/localize_adaptive.hpp"
#include "cpl/localize_universal.hpp"
#include "cpl/models.hpp"
#include "cpl/survival.hpp"

using namespace cpl;

namespace {

const Distribution N0 = Distribution::gaussian(0.0, 1.0);
const Distribution N1 = Distribution::gaussian(1.0, 1.0);

std::vector<double> stream(Index T, Index n) { return sample_path(N0, N1, T, n, 42).values; }

void BM_CusumStep(benchmark::State& state) {
  const DetectorSpec spec = make_cusum(N0, N1, 1e300);
  const std::vector<double> xs = stream(1000000, 4096);
  for (auto _ : state) {
    DetectorState st = init_state(spec);
    for (double x : xs) detector_step(spec, st, x);
    benchmark::DoNotOptimize(st.stat);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_CusumStep);

void BM_WeightedCusumStep(benchmark::State& state) {
  DetectorSpec spec = make_weighted(DetectorFamily::weighted_cusum, N0, {FamilyKind::gaussian_location, 1.0}, 0.75,
                                    0.2, 10, 1e300);
  spec.prune = state.range(0) != 0;
  const std::vector<double> xs = stream(1000000, 512);
  for (auto _ : state) {
    DetectorState st = init_state(spec);
    for (double x : xs) detector_step(spec, st, x);
    benchmark::DoNotOptimize(st.stat);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_WeightedCusumStep)->Arg(0)->Arg(1);

void BM_UniversalSet(benchmark::State& state) {
  const Index tau = state.range(0);
  const std::vector<double> xs = stream(tau - 10, tau);
  const SurvivalCurve curve = unit_curve(tau);
  for (auto _ : state) {
    const ConfidenceSetT s =
        universal_set(xs, tau, 0.05, curve, UniversalMode::known_pre, EProcessCriterion{make_lr(Direction::forward, N1, N0)},
                      make_lr(Direction::forward, N0, N1), make_lr(Direction::backward, N1, N0));
    benchmark::DoNotOptimize(s.members.size());
  }
}
BENCHMARK(BM_UniversalSet)->Arg(120)->Arg(1000)->Arg(10000);

void BM_AdaptiveKnown(benchmark::State& state) {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const std::vector<double> xs = stream(100, 400);
  const Index tau = run_to_stop(spec, xs).time;
  AdaptiveConfig cfg;
  cfg.N = static_cast<int>(state.range(0));
  cfg.B = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const ConfidenceSetT s = adaptive_set_known(xs, tau, cfg, N0, N1, spec, 7);
    benchmark::DoNotOptimize(s.members.size());
  }
}
BENCHMARK(BM_AdaptiveKnown)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PoissonCS(benchmark::State& state) {
  const Distribution p2 = Distribution::poisson(2.0);
  const std::vector<double> xs = sample_path(p2, p2, kNever, 200, 3).values;
  for (auto _ : state) benchmark::DoNotOptimize(poisson_cs(xs, 0.95, 1.0, {0.0, kInf}));
}
BENCHMARK(BM_PoissonCS);

}  // namespace
BENCHMARK_MAIN();
