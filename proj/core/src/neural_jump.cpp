#include "neuralign/neural_jump.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t steps_of(JumpVariant variant, const SentencePair& pair) {
  if (variant == JumpVariant::NNJumpTgt) return 1;
  return pair.source_length() > 0 ? pair.source_length() - 1 : 0;
}

}  // namespace

std::string to_string(JumpVariant variant) {
  switch (variant) {
    case JumpVariant::Discrete: return "discrete";
    case JumpVariant::NNJumpTgt: return "NNJumpTgt";
    case JumpVariant::NNJumpBoth: return "NNJumpBoth";
  }
  return "?";
}

JumpVariant parse_jump_variant(const std::string& name) {
  for (auto v : {JumpVariant::Discrete, JumpVariant::NNJumpTgt, JumpVariant::NNJumpBoth})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown jump variant '" + name + "'");
}

NeuralJumpModel::NeuralJumpModel(JumpVariant variant, const JumpDims& dims, std::size_t char_vocab_size,
                                 ParameterStore& store, std::mt19937_64& rng)
    : variant_(variant), dims_(dims) {
  if (variant == JumpVariant::Discrete) throw ConfigError("NeuralJumpModel needs a neural jump variant");
  if (dims.max_jump < 1) throw ConfigError("max_jump must be at least 1");
  if (dims.char_dim == 0 || dims.char_hidden == 0 || dims.context_hidden == 0 || dims.mlp_hidden == 0) {
    throw ConfigError("jump model dimensions must be positive");
  }
  char_embedding_ = &store.create("jump.char_embedding", {char_vocab_size, dims.char_dim}, rng);
  target_chars_ = BiLstm(store, "jump.target_chars", dims.char_dim, dims.char_hidden, rng);
  target_context_ = BiLstm(store, "jump.target_context", 2 * dims.char_hidden, dims.context_hidden, rng);
  std::size_t input = 2 * dims.context_hidden;
  if (variant == JumpVariant::NNJumpBoth) {
    source_chars_ = BiLstm(store, "jump.source_chars", dims.char_dim, dims.char_hidden, rng);
    source_context_ = BiLstm(store, "jump.source_context", 2 * dims.char_hidden, dims.context_hidden, rng);
    input *= 2;
  }
  hidden_weight_ = &store.create("jump.mlp.hidden.weight", {dims.mlp_hidden, input}, rng);
  hidden_bias_ = &store.add("jump.mlp.hidden.bias", Tensor({dims.mlp_hidden}));
  output_weight_ = &store.create("jump.mlp.output.weight", {bucket_count(dims.max_jump), dims.mlp_hidden}, rng);
  output_bias_ = &store.add("jump.mlp.output.bias", Tensor({bucket_count(dims.max_jump)}));
}

Var NeuralJumpModel::encode_sentence(Graph& graph, const BiLstm& words, const BiLstm& context,
                                     const std::vector<std::vector<int>>& chars) const {
  if (chars.empty()) throw ShapeError("empty sentence");
  Var table = graph.parameter(*char_embedding_);
  std::vector<Var> rows;
  rows.reserve(chars.size());
  for (const auto& c : chars) {
    if (c.empty()) throw DataError("cannot encode a word without characters");
    rows.push_back(words.encode(graph, select_rows(table, c)));
  }
  const auto states = context.states(graph, stack_rows(rows));
  return stack_rows(states);
}

Var NeuralJumpModel::logits(Graph& graph, const SentencePair& pair) const {
  const std::size_t I = pair.target_length();
  Var h = encode_sentence(graph, target_chars_, target_context_, pair.target_chars);
  Var x = h;
  if (variant_ == JumpVariant::NNJumpBoth) {
    const std::size_t J = pair.source_length();
    if (J < 2) return Var();
    Var hs = encode_sentence(graph, source_chars_, source_context_, pair.source_chars);
    std::vector<int> target_rows;
    std::vector<int> source_rows;
    for (std::size_t k = 0; k + 1 < J; ++k) {
      for (std::size_t i = 0; i < I; ++i) {
        target_rows.push_back(static_cast<int>(i));
        source_rows.push_back(static_cast<int>(k));
      }
    }
    const Var parts[] = {select_rows(h, target_rows), select_rows(hs, source_rows)};
    x = concat_cols(parts);
  }
  Var hidden = htanh(linear(x, graph.parameter(*hidden_weight_), graph.parameter(*hidden_bias_)));
  return linear(hidden, graph.parameter(*output_weight_), graph.parameter(*output_bias_));
}

std::vector<Matrix> NeuralJumpModel::bucket_probs(const Tensor& logits, const SentencePair& pair) const {
  const std::size_t I = pair.target_length();
  const std::size_t nb = bucket_count(dims_.max_jump);
  const std::size_t steps = steps_of(variant_, pair);
  std::vector<Matrix> out;
  if (steps == 0) return out;
  if (logits.rows() != steps * I || logits.cols() != nb) throw ShapeError("jump logits have the wrong shape");
  std::vector<std::vector<int>> valid(I);
  for (std::size_t i = 0; i < I; ++i) valid[i] = valid_buckets(I, static_cast<int>(i + 1), dims_.max_jump);
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix m(I, nb);
    for (std::size_t i = 0; i < I; ++i) {
      const std::size_t r = k * I + i;
      double mx = kNegInf;
      for (int b : valid[i]) mx = std::max(mx, logits.at(r, static_cast<std::size_t>(b)));
      double z = 0.0;
      for (int b : valid[i]) z += std::exp(logits.at(r, static_cast<std::size_t>(b)) - mx);
      for (int b : valid[i]) m(i, static_cast<std::size_t>(b)) = std::exp(logits.at(r, static_cast<std::size_t>(b)) - mx) / z;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Matrix> NeuralJumpModel::bucket_probs(const SentencePair& pair) const {
  Graph graph(false);
  Var l = logits(graph, pair);
  if (!l.valid()) return {};
  return bucket_probs(l.value(), pair);
}

std::vector<Matrix> NeuralJumpModel::transition_matrices(const SentencePair& pair, double p0) const {
  const auto probs = bucket_probs(pair);
  std::vector<Matrix> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(transition_matrix(pair.target_length(), p, dims_.max_jump, p0));
  return out;
}

Var NeuralJumpModel::auxiliary(Graph& graph, Var logits, const SentencePair& pair, const Posteriors& posteriors,
                               double p0) const {
  const std::size_t I = pair.target_length();
  const std::size_t S = state_count(I);
  const std::size_t nb = bucket_count(dims_.max_jump);
  const int K = dims_.max_jump;
  const std::size_t steps = steps_of(variant_, pair);
  if (posteriors.target_length != I) throw ShapeError("posteriors do not match the sentence");
  if (posteriors.transition.empty()) return graph.constant(Tensor({1, 1}));
  if (!logits.valid() || logits.rows() != steps * I) throw ShapeError("jump logits have the wrong shape");

  const bool per_step = variant_ == JumpVariant::NNJumpBoth;
  // weights[i] is [rows of group i x nb].
  std::vector<Tensor> weights(I, Tensor({steps == 1 || !per_step ? std::size_t{1} : steps, nb}));
  double constant = 0.0;
  const double log_p0 = std::log(p0);
  const double log_real = std::log1p(-p0);
  for (std::size_t k = 0; k < posteriors.transition.size(); ++k) {
    const Matrix& xi = posteriors.transition[k];
    const std::size_t row = per_step ? k : 0;
    for (std::size_t s = 0; s < S; ++s) {
      const int from = state_position(s, I);
      for (std::size_t t = 0; t < S; ++t) {
        const double w = xi(s, t);
        if (w == 0.0) continue;
        if (is_null_state(t, I)) {
          if (state_position(t, I) != from) throw Error("posterior mass on an impossible null transition");
          constant += w * log_p0;
          continue;
        }
        const int b = jump_bucket(state_position(t, I) - from, K);
        weights[static_cast<std::size_t>(from - 1)].at(row, static_cast<std::size_t>(b)) += w;
        constant += w * log_real;
      }
    }
  }
  std::vector<Var> terms;
  for (std::size_t i = 0; i < I; ++i) {
    const int from = static_cast<int>(i + 1);
    // Offset split inside the overflow buckets.
    std::vector<int> multiplicity(nb, 0);
    for (std::size_t t = 1; t <= I; ++t) ++multiplicity[static_cast<std::size_t>(jump_bucket(static_cast<int>(t) - from, K))];
    for (std::size_t r = 0; r < weights[i].rows(); ++r)
      for (std::size_t b = 0; b < nb; ++b)
        if (weights[i].at(r, b) != 0.0) constant -= weights[i].at(r, b) * std::log(multiplicity[b]);
    std::vector<int> rows;
    for (std::size_t k = 0; k < (per_step ? steps : 1); ++k) rows.push_back(static_cast<int>(k * I + i));
    const auto valid = valid_buckets(I, from, K);
    Var lsm = log_softmax(select_rows(logits, rows), valid);
    terms.push_back(weighted_sum(lsm, weights[i]));
  }
  terms.push_back(graph.constant(Tensor({1, 1}, {constant})));
  return add_scalars(terms);
}

std::vector<double> neural_jump_buckets(const NeuralJumpModel& model, const SentencePair& pair,
                                        std::size_t from_state, std::size_t step) {
  const std::size_t I = pair.target_length();
  if (from_state >= state_count(I)) throw ShapeError("from_state out of range");
  if (model.variant() == JumpVariant::NNJumpBoth && step + 1 >= pair.source_length()) {
    throw ShapeError("NNJumpBoth needs a previous source position");
  }
  const auto probs = model.bucket_probs(pair);
  const Matrix& m = probs.at(model.variant() == JumpVariant::NNJumpTgt ? 0 : step);
  const auto row = m.row(static_cast<std::size_t>(state_position(from_state, I) - 1));
  return {row.begin(), row.end()};
}

}  // namespace neuralign
