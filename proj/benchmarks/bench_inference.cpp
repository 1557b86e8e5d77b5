#include <benchmark/benchmark.h>

#include <random>

#include "neuralign/inference.hpp"
#include "neuralign/jump.hpp"

using namespace neuralign;

namespace {

Matrix random_emission(std::size_t I, std::size_t J, std::mt19937_64& rng) {
  Matrix m(I + 1, J);
  std::uniform_real_distribution<double> u(-8.0, 0.0);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

}  // namespace

static void BM_ForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Matrix em = random_emission(n, n, rng);
  const JumpTable table = JumpTable::uniform();
  const Matrix t = transition_matrix(n, table);
  const auto init = initial_distribution(n, table);
  for (auto _ : state) {
    Posteriors p = forward_backward(em, std::span<const Matrix>(&t, 1), init);
    benchmark::DoNotOptimize(p.log_likelihood);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForwardBackward)->RangeMultiplier(2)->Range(8, 64)->Complexity();

static void BM_Ibm1Posteriors(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const Matrix em = random_emission(n, n, rng);
  for (auto _ : state) {
    Posteriors p = ibm1_posteriors(em);
    benchmark::DoNotOptimize(p.log_likelihood);
  }
}
BENCHMARK(BM_Ibm1Posteriors)->Arg(16)->Arg(48);
