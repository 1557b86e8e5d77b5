#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "neuralign/corpus.hpp"
#include "neuralign/inference.hpp"
#include "neuralign/jump.hpp"
#include "neuralign/lstm.hpp"
#include "neuralign/matrix.hpp"
#include "neuralign/params.hpp"
#include "neuralign/tensor.hpp"

namespace neuralign {

enum class JumpVariant { Discrete, NNJumpTgt, NNJumpBoth };

std::string to_string(JumpVariant variant);
JumpVariant parse_jump_variant(const std::string& name);

struct JumpDims {
  std::size_t char_dim = 64;
  std::size_t char_hidden = 64;     // word encoder units per direction
  std::size_t context_hidden = 64;  // sentence encoder units per direction
  std::size_t mlp_hidden = 80;
  int max_jump = kDefaultMaxJump;
};

// Neural bucket distribution. NNJumpTgt conditions on the contextual
// encoding of the target word at the from-position; NNJumpBoth also on the
// contextual encoding of the previous source word. Parameters live under
// the "jump." prefix.
class NeuralJumpModel {
 public:
  NeuralJumpModel() = default;
  NeuralJumpModel(JumpVariant variant, const JumpDims& dims, std::size_t char_vocab_size, ParameterStore& store,
                  std::mt19937_64& rng);

  JumpVariant variant() const noexcept { return variant_; }
  const JumpDims& dims() const noexcept { return dims_; }
  int max_jump() const noexcept { return dims_.max_jump; }

  // Bucket logits. NNJumpTgt: [I x (2K+3)], row i-1 leaves position i.
  // NNJumpBoth: [(J-1) I x (2K+3)], row k I + i-1 leaves position i on the
  // step from source position k+1 to k+2.
  Var logits(Graph& graph, const SentencePair& pair) const;

  // Bucket distributions normalised over the valid buckets of each
  // from-position: one [I x (2K+3)] matrix (NNJumpTgt) or J-1 of them.
  std::vector<Matrix> bucket_probs(const SentencePair& pair) const;
  std::vector<Matrix> bucket_probs(const Tensor& logits, const SentencePair& pair) const;
  // Transition matrices for forward_backward, sharing p0 with the count
  // based null machinery.
  std::vector<Matrix> transition_matrices(const SentencePair& pair, double p0) const;

  // Transition part of the EM auxiliary,
  //   sum_j sum_{s,s'} xi_j(s, s') log p(s' | s),
  // with the p0 and overflow-split constants included.
  Var auxiliary(Graph& graph, Var logits, const SentencePair& pair, const Posteriors& posteriors, double p0) const;

 private:
  Var encode_sentence(Graph& graph, const BiLstm& words, const BiLstm& context,
                      const std::vector<std::vector<int>>& chars) const;

  JumpVariant variant_ = JumpVariant::NNJumpTgt;
  JumpDims dims_;
  Tensor* char_embedding_ = nullptr;
  BiLstm target_chars_;
  BiLstm target_context_;
  BiLstm source_chars_;
  BiLstm source_context_;
  Tensor* hidden_weight_ = nullptr;
  Tensor* hidden_bias_ = nullptr;
  Tensor* output_weight_ = nullptr;
  Tensor* output_bias_ = nullptr;
};

// Bucket distribution when leaving `from_state`; `step` is the
// 0-based transition index (ignored by NNJumpTgt).
std::vector<double> neural_jump_buckets(const NeuralJumpModel& model, const SentencePair& pair,
                                        std::size_t from_state, std::size_t step = 0);

}  // namespace neuralign
