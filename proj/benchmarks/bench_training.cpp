#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "neuralign/corpus.hpp"
#include "neuralign/discrete.hpp"
#include "neuralign/tensor.hpp"
#include "neuralign/translation.hpp"

using namespace neuralign;

namespace {

std::vector<SentencePair> random_corpus(std::size_t count, std::size_t types, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, types - 1), len(5, 20);
  std::vector<SentencePair> pairs(count);
  for (std::size_t n = 0; n < count; ++n) {
    pairs[n].line = n;
    const std::size_t I = len(rng), J = len(rng);
    for (std::size_t i = 0; i < I; ++i) pairs[n].target_words.push_back("e" + std::to_string(word(rng)));
    for (std::size_t j = 0; j < J; ++j) pairs[n].source_words.push_back("f" + std::to_string(word(rng)));
  }
  return pairs;
}

struct Encoded {
  std::vector<SentencePair> pairs;
  Vocabulary source, target;
  CharVocabulary chars;
};

Encoded encoded_corpus(std::size_t count, std::size_t types) {
  Encoded e;
  e.pairs = random_corpus(count, types, 5);
  e.source = build_vocab(e.pairs, Side::Source);
  e.target = build_vocab(e.pairs, Side::Target);
  e.chars = build_char_vocab(e.pairs);
  encode_pairs(e.pairs, e.source, e.target, e.chars);
  return e;
}

}  // namespace

static void BM_Ibm1EmStep(benchmark::State& state) {
  const Encoded e = encoded_corpus(static_cast<std::size_t>(state.range(0)), 500);
  const TranslationTable table = TranslationTable::uniform_cooccurrence(e.pairs, e.target.size());
  for (auto _ : state) {
    Ibm1StepResult r = ibm1_em_step(e.pairs, table);
    benchmark::DoNotOptimize(r.log_likelihood);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ibm1EmStep)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_NeuralLogprobs(benchmark::State& state) {
  const Encoded e = encoded_corpus(50, static_cast<std::size_t>(state.range(0)));
  ParameterStore store;
  std::mt19937_64 rng(6);
  const NeuralTranslationModel model(TranslationVariant::NN, TranslationDims{}, e.source.size(), e.target.size(),
                                     e.chars.size(), store, rng);
  std::vector<int> ids;
  for (std::size_t id = 0; id < e.source.size(); ++id)
    if (static_cast<int>(id) != kNullId) ids.push_back(static_cast<int>(id));
  const SupportScorer scorer(model, make_support(ids));
  std::size_t n = 0;
  for (auto _ : state) {
    Matrix m = scorer.emission_logprobs(e.pairs[n++ % e.pairs.size()]);
    benchmark::DoNotOptimize(m.data().data());
  }
}
BENCHMARK(BM_NeuralLogprobs)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

static void BM_NeuralAuxiliaryGradient(benchmark::State& state) {
  const Encoded e = encoded_corpus(50, 1000);
  ParameterStore store;
  std::mt19937_64 rng(7);
  const NeuralTranslationModel model(TranslationVariant::NN, TranslationDims{}, e.source.size(), e.target.size(),
                                     e.chars.size(), store, rng);
  std::vector<int> ids;
  for (std::size_t id = 0; id < e.source.size(); ++id)
    if (static_cast<int>(id) != kNullId) ids.push_back(static_cast<int>(id));
  const OutputSupport support = make_support(ids);
  std::size_t n = 0;
  for (auto _ : state) {
    const SentencePair& pair = e.pairs[n++ % e.pairs.size()];
    Graph g;
    Var lp = model.translation_logprobs(g, pair, support, true, rng);
    Var em = NeuralTranslationModel::emission(lp, pair, support);
    Tensor w({em.rows(), em.cols()}, 1.0 / static_cast<double>(em.rows()));
    g.backward(weighted_sum(em, w));
  }
}
BENCHMARK(BM_NeuralAuxiliaryGradient)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
