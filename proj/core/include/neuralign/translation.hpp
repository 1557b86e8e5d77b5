#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuralign/corpus.hpp"
#include "neuralign/lstm.hpp"
#include "neuralign/matrix.hpp"
#include "neuralign/params.hpp"
#include "neuralign/tensor.hpp"

namespace neuralign {

enum class TranslationVariant { NN, CtxCc, CtxCnn, NNCharTgt, NNCharWord, NNCharBoth };

std::string to_string(TranslationVariant variant);
// Throws ConfigError for unknown names.
TranslationVariant parse_translation_variant(const std::string& name);
bool uses_target_chars(TranslationVariant variant);
bool uses_word_embeddings(TranslationVariant variant);

struct TranslationDims {
  std::size_t embedding_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t context_width = 1;  // h
  std::size_t char_dim = 64;
  std::size_t char_hidden = 64;  // units per direction
  double dropout = 0.1;
};

// Columns of the output softmax. For the character-level output layer each
// column also carries the character ids of its word. In open mode source
// tokens are looked up by surface form first.
struct OutputSupport {
  std::vector<int> ids;  // source id per column, -1 for words outside the vocabulary
  std::vector<std::vector<int>> chars;
  bool open = false;
  std::unordered_map<int, int> column_of_id;
  std::unordered_map<std::string, int> column_of_surface;

  std::size_t size() const noexcept { return ids.size(); }
  // Column of source token j of `pair`; throws if it is not covered.
  int column(const SentencePair& pair, std::size_t j) const;
  std::vector<int> columns(const SentencePair& pair) const;
};

// Support over vocabulary ids (closed vocabulary).
OutputSupport make_support(std::span<const int> ids);
// Closed support whose columns are spelled out for a character-level output
// layer.
OutputSupport make_char_support(std::span<const int> ids, const Vocabulary& source_vocab,
                                const CharVocabulary& chars, std::size_t max_word_chars = kDefaultMaxWordChars);
// Open support: every ordinary vocabulary word plus the given extra surface
// forms (duplicates and vocabulary words are ignored).
OutputSupport make_open_support(const Vocabulary& source_vocab, const CharVocabulary& chars,
                                std::span<const std::string> extra_words,
                                std::size_t max_word_chars = kDefaultMaxWordChars);
// Adds surface forms to an open support.
void extend_open_support(OutputSupport& support, const CharVocabulary& chars, std::span<const std::string> words,
                         std::size_t max_word_chars = kDefaultMaxWordChars);

// Output layer evaluated for one support: weight [n x H] and, except for the
// character-level output layer, bias [1 x n].
struct OutputWeights {
  Var weight;
  Var bias;
};

// Neural p(f | e) for the six translation variants. Parameters live in the
// ParameterStore passed at construction, under the "tr." prefix.
class NeuralTranslationModel {
 public:
  NeuralTranslationModel() = default;
  NeuralTranslationModel(TranslationVariant variant, const TranslationDims& dims, std::size_t source_vocab_size,
                         std::size_t target_vocab_size, std::size_t char_vocab_size, ParameterStore& store,
                         std::mt19937_64& rng);

  TranslationVariant variant() const noexcept { return variant_; }
  const TranslationDims& dims() const noexcept { return dims_; }
  std::size_t source_vocab_size() const noexcept { return source_vocab_size_; }
  std::size_t target_vocab_size() const noexcept { return target_vocab_size_; }
  bool char_output() const noexcept { return variant_ == TranslationVariant::NNCharBoth; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  // Input features of every state, [(I+1) x feature_dim]; row 0 is NULL.
  Var features(Graph& graph, const SentencePair& pair) const;
  // Hidden representations [(I+1) x H]: features -> linear -> htanh -> dropout.
  Var hidden(Graph& graph, const SentencePair& pair, bool training, std::mt19937_64& rng) const;
  // Character encoding of one source word through the output projection,
  // [1 x H] (character-level output layer only).
  Var encode_source_word(Graph& graph, std::span<const int> chars) const;
  OutputWeights output(Graph& graph, const OutputSupport& support) const;
  // Log-softmax over the support, [(I+1) x n].
  Var logprobs(Graph& graph, Var hidden, const OutputWeights& output) const;
  // Convenience: hidden + output + logprobs.
  Var translation_logprobs(Graph& graph, const SentencePair& pair, const OutputSupport& support, bool training,
                           std::mt19937_64& rng) const;
  // Columns of the source tokens, [(I+1) x J]: the emission matrix.
  static Var emission(Var logprobs, const SentencePair& pair, const OutputSupport& support);

 private:
  Var char_encode(Graph& graph, const BiLstm& encoder, std::span<const int> chars) const;

  TranslationVariant variant_ = TranslationVariant::NN;
  TranslationDims dims_;
  std::size_t source_vocab_size_ = 0;
  std::size_t target_vocab_size_ = 0;
  std::size_t feature_dim_ = 0;

  Tensor* target_embedding_ = nullptr;  // [Vt + 1 x E], last row is the boundary pad
  Tensor* filter_ = nullptr;
  Tensor* char_embedding_ = nullptr;
  BiLstm target_chars_;
  BiLstm source_chars_;
  Tensor* source_projection_ = nullptr;
  Tensor* hidden_weight_ = nullptr;
  Tensor* hidden_bias_ = nullptr;
  Tensor* output_weight_ = nullptr;
  Tensor* output_bias_ = nullptr;
};

// Evaluation-mode scorer with the output layer of a fixed support computed
// once. In open mode, tokens missing from the support are scored by adding
// them as extra columns for that sentence only.
class SupportScorer {
 public:
  SupportScorer(const NeuralTranslationModel& model, OutputSupport support, const CharVocabulary* chars = nullptr,
                std::size_t max_word_chars = kDefaultMaxWordChars);

  const OutputSupport& support() const noexcept { return support_; }
  // Emission log-probabilities [(I+1) x J] of one sentence.
  Matrix emission_logprobs(const SentencePair& pair) const;

 private:
  const NeuralTranslationModel* model_;
  OutputSupport support_;
  const CharVocabulary* chars_;
  std::size_t max_word_chars_;
  Tensor weight_;
  Tensor bias_;
};

// log p(f | e) under the character-level output layer, normalised over
// `support` extended by f when f is not already a column.
double open_pair_score(const NeuralTranslationModel& model, const CharVocabulary& chars,
                       const Vocabulary& target_vocab, const std::string& target_word,
                       const std::string& source_word, const OutputSupport& support,
                       std::size_t max_word_chars = kDefaultMaxWordChars);

}  // namespace neuralign
