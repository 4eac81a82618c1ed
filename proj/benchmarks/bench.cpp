#include <random>

#include <benchmark/benchmark.h>

#include "lcvx/control.hpp"
#include "lcvx/convexify.hpp"
#include "lcvx/sdp.hpp"
#include "lcvx/symmat.hpp"

static void BM_SymEig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = normal(rng);
  }
  const lcvx::SymMat s(m);
  for (auto _ : state) benchmark::DoNotOptimize(lcvx::sym_eig(s));
}
BENCHMARK(BM_SymEig)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_SolveExample2(benchmark::State& state) {
  const auto c = lcvx::example2_map();
  for (auto _ : state) benchmark::DoNotOptimize(lcvx::solve(c.target));
}
BENCHMARK(BM_SolveExample2)->Unit(benchmark::kMillisecond);

static void BM_CtSynthesis(benchmark::State& state) {
  const auto sys = lcvx::random_stabilizable(static_cast<int>(state.range(0)), 1, 3, lcvx::Clock::ContinuousTime);
  lcvx::SynthesisOptions opts;
  opts.certify = false;
  for (auto _ : state) benchmark::DoNotOptimize(lcvx::ct_synthesize(sys, opts));
}
BENCHMARK(BM_CtSynthesis)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_Certify(benchmark::State& state) {
  const auto p = lcvx::example1_problem();
  const auto c = lcvx::example1_map(p);
  for (auto _ : state) benchmark::DoNotOptimize(lcvx::certify(p, c, 1e-7, 1e-8, 100, 0));
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
