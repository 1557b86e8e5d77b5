#include "neuralign/lstm.hpp"

#include "neuralign/errors.hpp"

namespace neuralign {

Lstm::Lstm(ParameterStore& store, const std::string& name, std::size_t input_dim, std::size_t units,
           std::mt19937_64& rng)
    : input_dim_(input_dim), units_(units) {
  weight_ = &store.create(name + ".weight", {4 * units, input_dim + units}, rng);
  bias_ = &store.add(name + ".bias", Tensor({4 * units}));
}

std::vector<Var> Lstm::run(Graph& graph, Var inputs, bool reverse) const {
  const std::size_t n = inputs.rows();
  if (n == 0) throw ShapeError("LSTM over an empty sequence");
  if (inputs.cols() != input_dim_) throw ShapeError("LSTM input width mismatch");
  Var weight = graph.parameter(*weight_);
  Var bias = graph.parameter(*bias_);
  Var state = graph.constant(Tensor({1, 2 * units_}));
  std::vector<Var> hidden(n);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t row = reverse ? n - 1 - step : step;
    state = lstm_cell(inputs, row, state, weight, bias);
    hidden[row] = slice_cols(state, 0, units_);
  }
  return hidden;
}

BiLstm::BiLstm(ParameterStore& store, const std::string& name, std::size_t input_dim, std::size_t units,
               std::mt19937_64& rng)
    : forward_(store, name + ".fwd", input_dim, units, rng), backward_(store, name + ".bwd", input_dim, units, rng) {}

Var BiLstm::encode(Graph& graph, Var inputs) const {
  const auto fwd = forward_.run(graph, inputs, false);
  const auto bwd = backward_.run(graph, inputs, true);
  const Var parts[] = {fwd.back(), bwd.front()};
  return concat_cols(parts);
}

std::vector<Var> BiLstm::states(Graph& graph, Var inputs) const {
  const auto fwd = forward_.run(graph, inputs, false);
  const auto bwd = backward_.run(graph, inputs, true);
  std::vector<Var> out;
  out.reserve(fwd.size());
  for (std::size_t t = 0; t < fwd.size(); ++t) {
    const Var parts[] = {fwd[t], bwd[t]};
    out.push_back(concat_cols(parts));
  }
  return out;
}

Var bilstm_encode(Graph& graph, const BiLstm& encoder, Var sequence) { return encoder.encode(graph, sequence); }

}  // namespace neuralign
