#include <benchmark/benchmark.h>

#include "music/dataio.hpp"
#include "music/experiment.hpp"
#include "music/optimizers.hpp"

namespace {

using namespace music;

struct Setup {
  QuadraticProblem quad = synth_uniform(10, 10, 100, 1e-6, 1);
  LogisticProblem logi = synth_logistic(16, 30, 50, 1e-3, 1);
  MixingMatrix w = metropolis_weights(erdos_renyi(100, 4.0, 1));
  MixingMatrix wb = half_identity(w);
  MixingMatrix wb50 = half_identity(metropolis_weights(erdos_renyi(50, 4.0, 1)));
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_QuadraticGradient(benchmark::State& state) {
  const auto& s = setup();
  Vector x = Vector::Constant(10, 0.1);
  Vector g(10);
  for (auto _ : state) {
    for (std::size_t i = 0; i < 100; ++i) s.quad.gradient(i, std::span<const double>(x.data(), 10), std::span<double>(g.data(), 10));
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_QuadraticGradient);

void BM_LogisticGradient(benchmark::State& state) {
  const auto& s = setup();
  Vector x = Vector::Constant(16, 0.1);
  Vector g(16);
  for (auto _ : state) {
    for (std::size_t i = 0; i < 50; ++i) s.logi.gradient(i, std::span<const double>(x.data(), 16), std::span<double>(g.data(), 16));
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_LogisticGradient);

void BM_Combine(benchmark::State& state) {
  const auto& s = setup();
  AgentMatrix in = AgentMatrix::Constant(100, 10, 1.0);
  AgentMatrix out(100, 10);
  for (auto _ : state) {
    s.w.combine(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Combine);

// One iteration of each algorithm on the 100-agent least-squares problem.
void BM_Step(benchmark::State& state) {
  const auto& s = setup();
  AlgorithmConfig cfg;
  cfg.kind = static_cast<AlgorithmKind>(state.range(0));
  cfg.local_updates = is_single_update(cfg.kind) ? 1 : 3;
  cfg.schedule = StepSchedule::constant(1e-4);
  const MixingMatrix& m = uses_half_identity(cfg.kind) ? s.wb : s.w;
  auto st = NetworkState::zeros(100, 10);
  for (auto _ : state) {
    step(st, s.quad, m, cfg);
    benchmark::DoNotOptimize(st.x.data());
  }
  state.SetLabel(std::string(to_string(cfg.kind)));
}
BENCHMARK(BM_Step)->DenseRange(0, 5);

void BM_RunExactMusicLogistic(benchmark::State& state) {
  const auto& s = setup();
  AlgorithmConfig cfg;
  cfg.kind = AlgorithmKind::ExactMusic;
  cfg.local_updates = 3;
  cfg.schedule = StepSchedule::constant(0.002);
  const Vector xs = Vector::Constant(16, 0.01);
  for (auto _ : state) {
    const Trace tr = run(s.logi, s.wb50, cfg, {1000, 0.0}, xs);
    benchmark::DoNotOptimize(tr.records.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RunExactMusicLogistic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
