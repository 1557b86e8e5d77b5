#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "neuralign/decoder.hpp"
#include "neuralign/jump.hpp"

using namespace neuralign;

static void BM_GrowDiagFinal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pos(1, n), noise(-2, 2);
  LinkSet fwd, rev;
  for (int j = 1; j <= n; ++j) {
    fwd.insert({j, std::clamp(j + noise(rng), 1, n)});
    rev.insert({j, std::clamp(j + noise(rng), 1, n)});
    if (j % 5 == 0) rev.insert({pos(rng), pos(rng)});
  }
  for (auto _ : state) {
    LinkSet out = grow_diag_final(fwd, rev, static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    benchmark::DoNotOptimize(out.size());
  }
}
BENCHMARK(BM_GrowDiagFinal)->Arg(10)->Arg(30)->Arg(50);

static void BM_Viterbi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  Matrix em(n + 1, n);
  std::uniform_real_distribution<double> u(-8.0, 0.0);
  for (auto& v : em.data()) v = u(rng);
  const JumpTable table = JumpTable::uniform();
  const Matrix t = transition_matrix(n, table);
  const auto init = initial_distribution(n, table);
  for (auto _ : state) {
    LinkSet links = viterbi(em, std::span<const Matrix>(&t, 1), init);
    benchmark::DoNotOptimize(links.size());
  }
}
BENCHMARK(BM_Viterbi)->Arg(16)->Arg(48);
