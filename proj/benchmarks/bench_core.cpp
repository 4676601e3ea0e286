#include <benchmark/benchmark.h>

#include <string>

#include "rdslack/slack_select.hpp"

namespace {

using namespace rdslack;

const CaseData& case_data(int which) {
  static const CaseData cases[] = {
      load_matpower(std::string(RDSLACK_DATA_DIR) + "/case57.m"),
      load_matpower(std::string(RDSLACK_DATA_DIR) + "/case118.m"),
      load_matpower(std::string(RDSLACK_DATA_DIR) + "/case1354pegase.m"),
  };
  return cases[which];
}

const char* case_label(int which) {
  static const char* names[] = {"ieee57", "ieee118", "pegase1354"};
  return names[which];
}

void BM_ParseCase(benchmark::State& state) {
  const auto text = serialize_matpower(case_data(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(parse_matpower(text));
  state.SetLabel(case_label(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ParseCase)->DenseRange(0, 2);

void BM_Decompose(benchmark::State& state) {
  const auto op = prepare_operating_point(case_data(static_cast<int>(state.range(0))),
                                          GammaMode::homogeneous(0.1));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(op.state.laplacian));
  state.SetLabel(case_label(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Decompose)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_SingleSlackSolve(benchmark::State& state) {
  const auto op = prepare_operating_point(case_data(static_cast<int>(state.range(0))),
                                          GammaMode::homogeneous(0.1));
  const auto cfg = SolverConfig{}.with_warm_start(op.lossless.theta);
  const auto slack = op.network.gen_buses.front();
  for (auto _ : state) benchmark::DoNotOptimize(solve_single_slack(op.network, slack, cfg));
  state.SetLabel(case_label(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SingleSlackSolve)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_RankCandidates(benchmark::State& state) {
  const auto op = prepare_operating_point(case_data(static_cast<int>(state.range(0))),
                                          GammaMode::homogeneous(0.1));
  const auto candidates = filter_candidates(op.network);
  for (auto _ : state) benchmark::DoNotOptimize(rank_candidates(op.state, op.network, candidates));
  state.SetLabel(case_label(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RankCandidates)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_OptimalParticipation(benchmark::State& state) {
  const auto op = prepare_operating_point(case_data(1), GammaMode::homogeneous(0.1));
  const auto candidates = filter_candidates(op.network);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_participation(op.state, op.network, candidates));
  }
}
BENCHMARK(BM_OptimalParticipation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
