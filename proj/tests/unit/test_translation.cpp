#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "neuralign/corpus.hpp"
#include "neuralign/errors.hpp"
#include "neuralign/params.hpp"
#include "neuralign/translation.hpp"
#include "synthetic.hpp"

using namespace neuralign;
using neuralign::testing::make_pair;

namespace {

const TranslationVariant kAll[] = {TranslationVariant::NN,        TranslationVariant::CtxCc,
                                   TranslationVariant::CtxCnn,    TranslationVariant::NNCharTgt,
                                   TranslationVariant::NNCharWord, TranslationVariant::NNCharBoth};

TranslationDims small_dims() {
  TranslationDims d;
  d.embedding_dim = 6;
  d.hidden_dim = 5;
  d.char_dim = 4;
  d.char_hidden = 3;
  d.dropout = 0.0;
  return d;
}

class TranslationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus = {make_pair({"la", "maison", "bleue"}, {"the", "blue", "house"}),
              make_pair({"une", "maison"}, {"a", "house"}), make_pair({"la", "voiture"}, {"the", "car"})};
    source = build_vocab(corpus, Side::Source);
    target = build_vocab(corpus, Side::Target);
    chars = build_char_vocab(corpus);
    encode_pairs(corpus, source, target, chars);
  }

  NeuralTranslationModel make(TranslationVariant v, ParameterStore& store, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    return NeuralTranslationModel(v, small_dims(), source.size(), target.size(), chars.size(), store, rng);
  }

  OutputSupport support_for(const NeuralTranslationModel& m) const {
    if (m.char_output()) return make_open_support(source, chars, {});
    std::vector<int> ids;
    for (int id = 0; id < static_cast<int>(source.size()); ++id) ids.push_back(id);
    return make_support(ids);
  }

  SentencePair encoded(std::vector<std::string> src, std::vector<std::string> tgt) const {
    std::vector<SentencePair> p = {neuralign::testing::make_pair(src, tgt)};
    encode_pairs(p, source, target, chars);
    return p[0];
  }

  std::vector<SentencePair> corpus;
  Vocabulary source, target;
  CharVocabulary chars;
};

}  // namespace

TEST(TranslationVariant, NamesRoundTrip) {
  for (auto v : kAll) EXPECT_EQ(parse_translation_variant(to_string(v)), v);
  EXPECT_THROW(parse_translation_variant("NNChar"), ConfigError);
}

TEST_F(TranslationTest, ZeroWeightsGiveZeroRepresentation) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NN, store);
  for (auto& [name, p] : store) std::fill(p.value.values().begin(), p.value.values().end(), 0.0);
  Graph g(false);
  std::mt19937_64 rng(0);
  Var h = model.hidden(g, corpus[0], false, rng);
  EXPECT_EQ(h.rows(), 4u);
  for (const double v : h.value().values()) EXPECT_EQ(v, 0.0);
}

TEST_F(TranslationTest, CtxCcEdgeUsesPadding) {
  ParameterStore store;
  const auto model = make(TranslationVariant::CtxCc, store);
  const SentencePair p = encoded({"la"}, {"the", "the", "the"});
  Graph g(false);
  Var f = model.features(g, p);
  const std::size_t width = f.cols();
  ASSERT_EQ(width, 3 * small_dims().embedding_dim);
  bool differs = false;
  for (std::size_t c = 0; c < width; ++c) differs |= f.value().at(1, c) != f.value().at(2, c);
  EXPECT_TRUE(differs);
  // interior left and right slots hold the same word as the centre
  const std::size_t E = small_dims().embedding_dim;
  for (std::size_t c = 0; c < E; ++c) EXPECT_EQ(f.value().at(2, c), f.value().at(2, E + c));
}

TEST_F(TranslationTest, CharTargetSeparatesUnknownWords) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NNCharTgt, store);
  const SentencePair p = encoded({"la"}, {"cat", "hut"});
  ASSERT_EQ(p.target[0], kUnkId);
  ASSERT_EQ(p.target[1], kUnkId);
  Graph g(false);
  std::mt19937_64 rng(0);
  Var h = model.hidden(g, p, false, rng);
  bool differs = false;
  for (std::size_t c = 0; c < h.cols(); ++c) differs |= h.value().at(1, c) != h.value().at(2, c);
  EXPECT_TRUE(differs);
}

TEST_F(TranslationTest, ZeroOutputWeightsAreUniform) {
  for (auto v : kAll) {
    ParameterStore store;
    const auto model = make(v, store);
    for (const char* name : {"tr.output.weight", "tr.output.bias", "tr.source_projection"})
      if (store.contains(name)) std::fill(store.get(name).values().begin(), store.get(name).values().end(), 0.0);
    const OutputSupport s = support_for(model);
    Graph g(false);
    std::mt19937_64 rng(0);
    Var lp = model.translation_logprobs(g, corpus[0], s, false, rng);
    for (const double x : lp.value().values())
      EXPECT_NEAR(x, -std::log(static_cast<double>(s.size())), 1e-12) << to_string(v);
  }
}

TEST_F(TranslationTest, RowsNormalise) {
  for (auto v : kAll) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ParameterStore store;
      const auto model = make(v, store, seed);
      const OutputSupport s = support_for(model);
      for (const auto& p : corpus) {
        Graph g(false);
        std::mt19937_64 rng(0);
        const Tensor lp = model.translation_logprobs(g, p, s, false, rng).value();
        ASSERT_EQ(lp.rows(), p.target_length() + 1);
        for (std::size_t r = 0; r < lp.rows(); ++r) {
          double z = 0.0;
          for (std::size_t c = 0; c < lp.cols(); ++c) z += std::exp(lp.at(r, c));
          EXPECT_NEAR(z, 1.0, 1e-12) << to_string(v);
        }
      }
    }
  }
}

TEST_F(TranslationTest, EmissionPicksSourceColumns) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NN, store);
  const OutputSupport s = support_for(model);
  Graph g(false);
  std::mt19937_64 rng(0);
  Var lp = model.translation_logprobs(g, corpus[1], s, false, rng);
  Var em = NeuralTranslationModel::emission(lp, corpus[1], s);
  ASSERT_EQ(em.rows(), 3u);
  ASSERT_EQ(em.cols(), 2u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_EQ(em.value().at(r, j), lp.value().at(r, static_cast<std::size_t>(s.column(corpus[1], j))));
}

TEST_F(TranslationTest, ScorerMatchesGraph) {
  for (auto v : kAll) {
    ParameterStore store;
    const auto model = make(v, store);
    const OutputSupport s = support_for(model);
    const SupportScorer scorer(model, s, &chars);
    for (const auto& p : corpus) {
      Graph g(false);
      std::mt19937_64 rng(0);
      const Matrix expected =
          NeuralTranslationModel::emission(model.translation_logprobs(g, p, s, false, rng), p, s).value().to_matrix();
      const Matrix got = scorer.emission_logprobs(p);
      ASSERT_EQ(got.data().size(), expected.data().size());
      for (std::size_t k = 0; k < got.data().size(); ++k) EXPECT_NEAR(got.data()[k], expected.data()[k], 1e-12);
    }
  }
}

TEST_F(TranslationTest, CharBothScoresUnseenSourceWords) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NNCharBoth, store);
  const SupportScorer scorer(model, support_for(model), &chars);
  const SentencePair p = encoded({"maisonnette", "la"}, {"the", "house"});
  const Matrix m = scorer.emission_logprobs(p);
  for (const double x : m.data()) {
    EXPECT_TRUE(std::isfinite(x));
    EXPECT_LT(x, 0.0);
  }
}

TEST_F(TranslationTest, ClosedSupportRejectsUncoveredWord) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NN, store);
  const std::vector<int> ids = {0, 2};
  const OutputSupport s = make_support(ids);
  Graph g(false);
  std::mt19937_64 rng(0);
  Var lp = model.translation_logprobs(g, corpus[0], s, false, rng);
  EXPECT_THROW(NeuralTranslationModel::emission(lp, corpus[0], s), Error);
  EXPECT_THROW(make_support(std::vector<int>{}), ConfigError);
}

TEST_F(TranslationTest, OpenPairScoreConsistentWithLogprobs) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NNCharBoth, store);
  const OutputSupport s = support_for(model);
  const SentencePair p = encoded({"maison"}, {"house"});
  Graph g(false);
  std::mt19937_64 rng(0);
  const Tensor lp = model.translation_logprobs(g, p, s, false, rng).value();
  const double direct = lp.at(1, static_cast<std::size_t>(s.column(p, 0)));
  EXPECT_NEAR(open_pair_score(model, chars, target, "house", "maison", s), direct, 1e-12);
}

TEST_F(TranslationTest, OpenPairScoreUnseenPair) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NNCharBoth, store);
  const std::vector<std::string> both = {"zorg", "blim"};
  const OutputSupport base = make_open_support(source, chars, both);
  const double a = open_pair_score(model, chars, target, "house", "zorg", base);
  const double b = open_pair_score(model, chars, target, "house", "blim", base);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_TRUE(std::isfinite(b));
  // renormalised over {zorg, blim} the two scores form a distribution
  const double za = std::exp(a) / (std::exp(a) + std::exp(b));
  const double zb = std::exp(b) / (std::exp(a) + std::exp(b));
  EXPECT_NEAR(za + zb, 1.0, 1e-12);
  EXPECT_NE(a, b);
}

TEST_F(TranslationTest, OpenPairScoreIgnoresSupportOrder) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NNCharBoth, store);
  const std::vector<std::string> order1 = {"zorg", "blim", "quux"}, order2 = {"quux", "zorg", "blim"};
  const double a = open_pair_score(model, chars, target, "car", "blim", make_open_support(source, chars, order1));
  const double b = open_pair_score(model, chars, target, "car", "blim", make_open_support(source, chars, order2));
  EXPECT_NEAR(a, b, 1e-12);
}

TEST_F(TranslationTest, OpenPairScoreNeedsCharOutput) {
  ParameterStore store;
  const auto model = make(TranslationVariant::NN, store);
  EXPECT_THROW(open_pair_score(model, chars, target, "house", "maison", support_for(model)), ConfigError);
}

TEST_F(TranslationTest, DropoutOnlyInTraining) {
  ParameterStore store;
  TranslationDims d = small_dims();
  d.dropout = 0.5;
  std::mt19937_64 init(3);
  const NeuralTranslationModel model(TranslationVariant::NN, d, source.size(), target.size(), chars.size(), store,
                                     init);
  Graph g(false);
  std::mt19937_64 r1(5), r2(5);
  EXPECT_EQ(model.hidden(g, corpus[0], false, r1).value().values(),
            model.hidden(g, corpus[0], false, r2).value().values());
  std::size_t zeros = 0;
  const Tensor h = model.hidden(g, corpus[0], true, r1).value();
  for (const double v : h.values()) zeros += v == 0.0;
  EXPECT_GT(zeros, 0u);
}
