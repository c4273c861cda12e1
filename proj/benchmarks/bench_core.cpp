#include <benchmark/benchmark.h>

#include "eecdma/channel.hpp"
#include "eecdma/game.hpp"
#include "eecdma/lsa.hpp"
#include "eecdma/model.hpp"
#include "eecdma/tmse.hpp"

namespace {

using namespace eecdma;

NetworkState drop(int N, int K, std::uint64_t trial = 0) {
  SystemConfig cfg;
  cfg.N = N;
  cfg.K = K;
  ChannelModel model;
  model.seed = 1;
  const Realization r = sample(model, cfg, trial);
  return make_state(Eigen::VectorXd::Constant(K, cfg.p_max / 100.0), r.gains, r.codes);
}

SystemConfig config(int N, int K) {
  SystemConfig cfg;
  cfg.N = N;
  cfg.K = K;
  return cfg;
}

void BM_TargetSinr(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(target_sinr(120));
}
BENCHMARK(BM_TargetSinr);

void BM_SinrMmseAll(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const SystemConfig cfg = config(N, N);
  const NetworkState st = drop(N, N);
  for (auto _ : state) benchmark::DoNotOptimize(sinr_mmse_all(st, cfg));
}
BENCHMARK(BM_SinrMmseAll)->Arg(16)->Arg(64)->Arg(128);

void BM_TmseSweep(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  const SystemConfig cfg = config(N, K);
  const NetworkState st = drop(N, K);
  TmseConfig tcfg;
  tcfg.max_iters = 1;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(st, cfg, tcfg));
}
BENCHMARK(BM_TmseSweep)->Args({16, 8})->Args({16, 24})->Args({64, 70});

void BM_Game(benchmark::State& state) {
  const auto variant = static_cast<GameVariant>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  const SystemConfig cfg = config(16, K);
  const NetworkState st = drop(16, K);
  for (auto _ : state) benchmark::DoNotOptimize(run_game(st, cfg, variant));
  state.SetLabel(std::string(to_string(variant)));
}
BENCHMARK(BM_Game)
    ->Args({static_cast<int>(GameVariant::PowerOnlyMf), 10})
    ->Args({static_cast<int>(GameVariant::PowerMmse), 10})
    ->Args({static_cast<int>(GameVariant::FullCrossLayer), 10})
    ->Args({static_cast<int>(GameVariant::FullCrossLayer), 24})
    ->Unit(benchmark::kMillisecond);

void BM_InverseCdf(benchmark::State& state) {
  const ChannelModel model;
  for (auto _ : state) benchmark::DoNotOptimize(inv_cdf_sq_gain(model, 0.37));
}
BENCHMARK(BM_InverseCdf);

void BM_LsaProfile(benchmark::State& state) {
  ChannelModel model;
  const LsaInputs in = make_lsa_inputs(config(128, 64), model);
  for (auto _ : state) benchmark::DoNotOptimize(profile_mmse(in));
}
BENCHMARK(BM_LsaProfile)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
