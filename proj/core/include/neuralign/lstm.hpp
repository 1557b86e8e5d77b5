#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "neuralign/params.hpp"
#include "neuralign/tensor.hpp"

namespace neuralign {

// Single-direction LSTM over the rows of an input matrix. Gate biases start
// at zero.
class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterStore& store, const std::string& name, std::size_t input_dim, std::size_t units,
       std::mt19937_64& rng);

  std::size_t units() const noexcept { return units_; }
  std::size_t input_dim() const noexcept { return input_dim_; }

  // Hidden states [1 x u] for every row of `inputs` [n x d], in row order.
  // With reverse = true the rows are consumed last to first.
  std::vector<Var> run(Graph& graph, Var inputs, bool reverse) const;

 private:
  Tensor* weight_ = nullptr;
  Tensor* bias_ = nullptr;
  std::size_t input_dim_ = 0;
  std::size_t units_ = 0;
};

class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore& store, const std::string& name, std::size_t input_dim, std::size_t units,
         std::mt19937_64& rng);

  std::size_t output_dim() const noexcept { return 2 * forward_.units(); }

  // [final forward state, final backward state] as [1 x 2u].
  Var encode(Graph& graph, Var inputs) const;
  // Per-position [forward_t, backward_t], each [1 x 2u].
  std::vector<Var> states(Graph& graph, Var inputs) const;

 private:
  Lstm forward_;
  Lstm backward_;
};

// Encodes a sequence of rows with a bidirectional LSTM; throws on an empty
// sequence.
Var bilstm_encode(Graph& graph, const BiLstm& encoder, Var sequence);

}  // namespace neuralign
