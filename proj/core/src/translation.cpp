#include "neuralign/translation.hpp"

#include <algorithm>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

const std::vector<int> kNullChars = {CharVocabulary::kNullChar};

std::vector<int> word_chars(const CharVocabulary& chars, const std::string& word, std::size_t max_word_chars) {
  return chars.encode(word, max_word_chars);
}

}  // namespace

std::string to_string(TranslationVariant variant) {
  switch (variant) {
    case TranslationVariant::NN: return "NN";
    case TranslationVariant::CtxCc: return "CtxCc";
    case TranslationVariant::CtxCnn: return "CtxCnn";
    case TranslationVariant::NNCharTgt: return "NNCharTgt";
    case TranslationVariant::NNCharWord: return "NNCharWord";
    case TranslationVariant::NNCharBoth: return "NNCharBoth";
  }
  return "?";
}

TranslationVariant parse_translation_variant(const std::string& name) {
  for (auto v : {TranslationVariant::NN, TranslationVariant::CtxCc, TranslationVariant::CtxCnn,
                 TranslationVariant::NNCharTgt, TranslationVariant::NNCharWord, TranslationVariant::NNCharBoth}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown translation variant '" + name + "'");
}

bool uses_target_chars(TranslationVariant v) {
  return v == TranslationVariant::NNCharTgt || v == TranslationVariant::NNCharWord ||
         v == TranslationVariant::NNCharBoth;
}

bool uses_word_embeddings(TranslationVariant v) {
  return v == TranslationVariant::NN || v == TranslationVariant::CtxCc || v == TranslationVariant::CtxCnn ||
         v == TranslationVariant::NNCharWord;
}

// ------------------------------------------------------------ OutputSupport

int OutputSupport::column(const SentencePair& pair, std::size_t j) const {
  if (open) {
    const auto it = column_of_surface.find(pair.source_words.at(j));
    if (it != column_of_surface.end()) return it->second;
  }
  const auto it = column_of_id.find(pair.source.at(j));
  if (it == column_of_id.end()) {
    throw Error("source word '" + pair.source_words.at(j) + "' is outside the output support");
  }
  return it->second;
}

std::vector<int> OutputSupport::columns(const SentencePair& pair) const {
  std::vector<int> cols(pair.source_length());
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = column(pair, j);
  return cols;
}

OutputSupport make_support(std::span<const int> ids) {
  if (ids.empty()) throw ConfigError("empty output support");
  OutputSupport s;
  for (int id : ids) {
    if (s.column_of_id.count(id)) throw ConfigError("duplicate id in output support");
    s.column_of_id[id] = static_cast<int>(s.ids.size());
    s.ids.push_back(id);
  }
  return s;
}

OutputSupport make_char_support(std::span<const int> ids, const Vocabulary& source_vocab, const CharVocabulary& chars,
                                std::size_t max_word_chars) {
  OutputSupport s = make_support(ids);
  for (int id : ids) {
    if (id == kUnkId) {
      s.chars.push_back({CharVocabulary::kUnkChar});
    } else if (id == kNullId) {
      s.chars.push_back(kNullChars);
    } else {
      const std::string& w = source_vocab.word(id);
      s.chars.push_back(word_chars(chars, w, max_word_chars));
      s.column_of_surface.emplace(w, s.column_of_id[id]);
    }
  }
  return s;
}

OutputSupport make_open_support(const Vocabulary& source_vocab, const CharVocabulary& chars,
                                std::span<const std::string> extra_words, std::size_t max_word_chars) {
  std::vector<int> ids;
  for (std::size_t id = 2; id < source_vocab.size(); ++id) ids.push_back(static_cast<int>(id));
  OutputSupport s;
  if (!ids.empty()) s = make_char_support(ids, source_vocab, chars, max_word_chars);
  s.open = true;
  extend_open_support(s, chars, extra_words, max_word_chars);
  if (s.size() == 0) throw ConfigError("empty output support");
  return s;
}

void extend_open_support(OutputSupport& support, const CharVocabulary& chars, std::span<const std::string> words,
                         std::size_t max_word_chars) {
  for (const auto& w : words) {
    if (w.empty()) throw DataError("empty source word");
    if (support.column_of_surface.count(w)) continue;
    support.column_of_surface.emplace(w, static_cast<int>(support.ids.size()));
    support.ids.push_back(-1);
    support.chars.push_back(word_chars(chars, w, max_word_chars));
  }
}

// ------------------------------------------------------------ model

NeuralTranslationModel::NeuralTranslationModel(TranslationVariant variant, const TranslationDims& dims,
                                               std::size_t source_vocab_size, std::size_t target_vocab_size,
                                               std::size_t char_vocab_size, ParameterStore& store,
                                               std::mt19937_64& rng)
    : variant_(variant), dims_(dims), source_vocab_size_(source_vocab_size), target_vocab_size_(target_vocab_size) {
  if (dims.embedding_dim == 0 || dims.hidden_dim == 0 || dims.char_dim == 0 || dims.char_hidden == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (!(dims.dropout >= 0.0 && dims.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  const std::size_t E = dims.embedding_dim;
  const std::size_t h = dims.context_width;
  if (uses_word_embeddings(variant)) {
    target_embedding_ = &store.create("tr.target_embedding", {target_vocab_size + 1, E}, rng);
  }
  if (uses_target_chars(variant)) {
    char_embedding_ = &store.create("tr.char_embedding", {char_vocab_size, dims.char_dim}, rng);
    target_chars_ = BiLstm(store, "tr.target_chars", dims.char_dim, dims.char_hidden, rng);
  }
  switch (variant) {
    case TranslationVariant::NN: feature_dim_ = E; break;
    case TranslationVariant::CtxCc: feature_dim_ = (2 * h + 1) * E; break;
    case TranslationVariant::CtxCnn:
      if (E <= 2 * h) throw ConfigError("embedding_dim must exceed 2 * context_width for CtxCnn");
      filter_ = &store.create("tr.filter", {2 * h + 1, 2 * h + 1}, rng);
      feature_dim_ = E - 2 * h;
      break;
    case TranslationVariant::NNCharTgt:
    case TranslationVariant::NNCharBoth: feature_dim_ = 2 * dims.char_hidden; break;
    case TranslationVariant::NNCharWord: feature_dim_ = 2 * dims.char_hidden + E; break;
  }
  hidden_weight_ = &store.create("tr.hidden.weight", {dims.hidden_dim, feature_dim_}, rng);
  hidden_bias_ = &store.add("tr.hidden.bias", Tensor({dims.hidden_dim}));
  if (char_output()) {
    source_chars_ = BiLstm(store, "tr.source_chars", dims.char_dim, dims.char_hidden, rng);
    source_projection_ = &store.create("tr.source_projection", {dims.hidden_dim, 2 * dims.char_hidden}, rng);
  } else {
    output_weight_ = &store.create("tr.output.weight", {source_vocab_size, dims.hidden_dim}, rng);
    output_bias_ = &store.add("tr.output.bias", Tensor({source_vocab_size}));
  }
}

Var NeuralTranslationModel::char_encode(Graph& graph, const BiLstm& encoder, std::span<const int> chars) const {
  if (chars.empty()) throw DataError("cannot encode a word without characters");
  Var table = graph.parameter(*char_embedding_);
  return encoder.encode(graph, select_rows(table, chars));
}

Var NeuralTranslationModel::features(Graph& graph, const SentencePair& pair) const {
  const std::size_t I = pair.target_length();
  if (I == 0) throw ShapeError("empty target sentence");
  std::vector<int> ids(I + 1, kNullId);
  for (std::size_t i = 0; i < I; ++i) ids[i + 1] = pair.target.at(i);

  auto char_features = [&]() {
    std::vector<Var> rows;
    rows.reserve(I + 1);
    rows.push_back(char_encode(graph, target_chars_, kNullChars));
    for (std::size_t i = 0; i < I; ++i) rows.push_back(char_encode(graph, target_chars_, pair.target_chars.at(i)));
    return stack_rows(rows);
  };
  // Window ids at offset `o` for every state; the NULL state sees only NULL.
  const int pad = static_cast<int>(target_vocab_size_);
  auto window_ids = [&](int o) {
    std::vector<int> w(I + 1, kNullId);
    for (std::size_t i = 1; i <= I; ++i) {
      const long p = static_cast<long>(i) + o;
      w[i] = (p >= 1 && p <= static_cast<long>(I)) ? pair.target[static_cast<std::size_t>(p - 1)] : pad;
    }
    return w;
  };
  const int h = static_cast<int>(dims_.context_width);

  switch (variant_) {
    case TranslationVariant::NN: return select_rows(graph.parameter(*target_embedding_), ids);
    case TranslationVariant::CtxCc: {
      Var emb = graph.parameter(*target_embedding_);
      std::vector<Var> parts;
      for (int o = -h; o <= h; ++o) parts.push_back(select_rows(emb, window_ids(o)));
      return concat_cols(parts);
    }
    case TranslationVariant::CtxCnn: {
      Var emb = graph.parameter(*target_embedding_);
      Var filter = graph.parameter(*filter_);
      std::vector<std::vector<int>> windows;
      for (int o = -h; o <= h; ++o) windows.push_back(window_ids(o));
      std::vector<Var> rows;
      rows.reserve(I + 1);
      std::vector<int> w(windows.size());
      for (std::size_t s = 0; s <= I; ++s) {
        for (std::size_t k = 0; k < windows.size(); ++k) w[k] = windows[k][s];
        rows.push_back(conv_combine(select_rows(emb, w), filter));
      }
      return stack_rows(rows);
    }
    case TranslationVariant::NNCharTgt:
    case TranslationVariant::NNCharBoth: return char_features();
    case TranslationVariant::NNCharWord: {
      const Var parts[] = {char_features(), select_rows(graph.parameter(*target_embedding_), ids)};
      return concat_cols(parts);
    }
  }
  throw Error("unreachable");
}

Var NeuralTranslationModel::hidden(Graph& graph, const SentencePair& pair, bool training,
                                   std::mt19937_64& rng) const {
  Var x = features(graph, pair);
  Var hcur = htanh(linear(x, graph.parameter(*hidden_weight_), graph.parameter(*hidden_bias_)));
  return dropout(hcur, dims_.dropout, training, rng);
}

Var NeuralTranslationModel::encode_source_word(Graph& graph, std::span<const int> chars) const {
  if (!char_output()) throw ConfigError("encode_source_word needs the character-level output layer");
  return linear(char_encode(graph, source_chars_, chars), graph.parameter(*source_projection_));
}

OutputWeights NeuralTranslationModel::output(Graph& graph, const OutputSupport& support) const {
  if (support.size() == 0) throw ConfigError("empty output support");
  OutputWeights out;
  if (char_output()) {
    if (support.chars.size() != support.size()) throw ConfigError("output support lacks character spellings");
    std::vector<Var> rows;
    rows.reserve(support.size());
    for (const auto& c : support.chars) rows.push_back(encode_source_word(graph, c));
    out.weight = stack_rows(rows);
    return out;
  }
  for (int id : support.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= source_vocab_size_) {
      throw ConfigError("output support id outside the source vocabulary");
    }
  }
  out.weight = select_rows(graph.parameter(*output_weight_), support.ids);
  out.bias = select_cols(graph.parameter(*output_bias_), support.ids);
  return out;
}

Var NeuralTranslationModel::logprobs(Graph&, Var hidden, const OutputWeights& output) const {
  Var logits = matmul_nt(hidden, output.weight);
  if (output.bias.valid()) logits = add_row(logits, output.bias);
  return log_softmax(logits);
}

Var NeuralTranslationModel::translation_logprobs(Graph& graph, const SentencePair& pair,
                                                 const OutputSupport& support, bool training,
                                                 std::mt19937_64& rng) const {
  Var h = hidden(graph, pair, training, rng);
  return logprobs(graph, h, output(graph, support));
}

Var NeuralTranslationModel::emission(Var logprobs, const SentencePair& pair, const OutputSupport& support) {
  const auto cols = support.columns(pair);
  return select_cols(logprobs, cols);
}

// ------------------------------------------------------------ SupportScorer

SupportScorer::SupportScorer(const NeuralTranslationModel& model, OutputSupport support, const CharVocabulary* chars,
                             std::size_t max_word_chars)
    : model_(&model), support_(std::move(support)), chars_(chars), max_word_chars_(max_word_chars) {
  if (support_.open && chars_ == nullptr) throw ConfigError("open support needs a character vocabulary");
  Graph graph(false);
  const OutputWeights w = model.output(graph, support_);
  weight_ = w.weight.value();
  if (w.bias.valid()) bias_ = w.bias.value();
}

Matrix SupportScorer::emission_logprobs(const SentencePair& pair) const {
  Graph graph(false);
  std::mt19937_64 unused(0);
  Var h = model_->hidden(graph, pair, false, unused);
  OutputWeights w;
  w.weight = graph.constant_ref(weight_);
  if (bias_.size() > 0) w.bias = graph.constant_ref(bias_);

  const OutputSupport* support = &support_;
  OutputSupport extended;
  if (support_.open) {
    std::vector<std::string> missing;
    for (const auto& word : pair.source_words)
      if (!support_.column_of_surface.count(word)) missing.push_back(word);
    if (!missing.empty()) {
      extended = support_;
      const std::size_t base = extended.size();
      extend_open_support(extended, *chars_, missing, max_word_chars_);
      std::vector<Var> rows = {w.weight};
      for (std::size_t c = base; c < extended.size(); ++c)
        rows.push_back(model_->encode_source_word(graph, extended.chars[c]));
      w.weight = stack_rows(rows);
      support = &extended;
    }
  }
  Var lp = model_->logprobs(graph, h, w);
  return NeuralTranslationModel::emission(lp, pair, *support).value().to_matrix();
}

double open_pair_score(const NeuralTranslationModel& model, const CharVocabulary& chars,
                       const Vocabulary& target_vocab, const std::string& target_word,
                       const std::string& source_word, const OutputSupport& support, std::size_t max_word_chars) {
  if (!model.char_output()) throw ConfigError("open_pair_score needs the NNCharBoth variant");
  if (target_word.empty() || source_word.empty()) throw DataError("open_pair_score: empty word");
  SentencePair pair;
  pair.target_words = {target_word};
  pair.target = {target_vocab.id(target_word)};
  pair.target_chars = {word_chars(chars, target_word, max_word_chars)};
  pair.source_words = {source_word};
  pair.source = {-1};
  OutputSupport s = support;
  s.open = true;
  const std::string words[] = {source_word};
  extend_open_support(s, chars, words, max_word_chars);
  Graph graph(false);
  std::mt19937_64 unused(0);
  Var lp = model.translation_logprobs(graph, pair, s, false, unused);
  return lp.value().at(1, static_cast<std::size_t>(s.column_of_surface.at(source_word)));
}

}  // namespace neuralign
