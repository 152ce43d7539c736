#include <benchmark/benchmark.h>

#include <random>

#include "kpack/kernels.hpp"

using namespace kpack;

namespace {

MultipartiteGraph dense(int r, int m, double keep, std::uint64_t seed) {
  MultipartiteGraph g(std::vector<int>(r, m));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(keep);
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int v = u + 1; v < g.num_vertices(); ++v)
      if (g.class_of(u) != g.class_of(v) && coin(rng)) g.add_edge(u, v);
  return g;
}

// groups of options with sparse compatibility, so the search backtracks
SelectionProblem selection(int groups, int options, double keep, std::uint64_t seed) {
  SelectionProblem p;
  p.group_sizes.assign(groups, options);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(keep);
  p.compat.assign(groups, std::vector<std::vector<Bitset>>(groups));
  for (int a = 0; a < groups; ++a)
    for (int b = a + 1; b < groups; ++b)
      for (int x = 0; x < options; ++x) {
        Bitset s(static_cast<std::size_t>(options));
        for (int y = 0; y < options; ++y)
          if (coin(rng)) s.set(y);
        p.compat[a][b].push_back(s);
      }
  return p;
}

void BM_EnumerateSerial(benchmark::State& st) {
  auto g = dense(5, static_cast<int>(st.range(0)), 0.8, 1);
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_cliques_serial(g, 4));
}

void BM_EnumerateParallel(benchmark::State& st) {
  auto g = dense(5, static_cast<int>(st.range(0)), 0.8, 1);
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_cliques_parallel(g, 4));
}

void BM_SelectionSerial(benchmark::State& st) {
  auto p = selection(static_cast<int>(st.range(0)), 24, 0.35, 2);
  for (auto _ : st) benchmark::DoNotOptimize(find_selection_serial(p));
}

void BM_SelectionParallel(benchmark::State& st) {
  auto p = selection(static_cast<int>(st.range(0)), 24, 0.35, 2);
  for (auto _ : st) benchmark::DoNotOptimize(find_selection_parallel(p));
}

}  // namespace

BENCHMARK(BM_EnumerateSerial)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SelectionSerial)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelectionParallel)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
