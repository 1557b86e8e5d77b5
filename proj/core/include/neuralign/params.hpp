#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "neuralign/tensor.hpp"

namespace neuralign {

// A trainable tensor together with its Adam moments.
struct Parameter {
  Tensor value;
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step = 0;
};

using GradientMap = std::map<std::string, Tensor>;

// Named parameters in a stable (lexicographic) order. References returned
// by create()/get() stay valid for the lifetime of the store.
class ParameterStore {
 public:
  // Creates a parameter initialised uniformly on [-scale, scale].
  Tensor& create(const std::string& name, std::vector<std::size_t> shape, std::mt19937_64& rng,
                 double scale = 0.1);
  Tensor& add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  Parameter& entry(const std::string& name);
  const Parameter& entry(const std::string& name) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t parameter_count() const;
  std::vector<std::string> names() const;

  void zero_grad();
  // Snapshot of every gradient buffer (zeros where none was allocated).
  GradientMap gradients() const;
  // Drops the Adam moments and step counters.
  void reset_optimizer();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Parameter> params_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam descent step on every parameter named in `grads`.
void adam_step(ParameterStore& store, const GradientMap& grads, double learning_rate,
               const AdamConfig& config = {});
// Same, using the gradient buffers held by the store.
void adam_step(ParameterStore& store, double learning_rate, const AdamConfig& config = {});

// Binary tensor file: magic, count, then per tensor the name, rank, dims
// and the row-major float64 payload, all little-endian.
void write_tensor_file(const std::filesystem::path& path, const ParameterStore& store);
std::map<std::string, Tensor> read_tensor_file(const std::filesystem::path& path);
// Plain-text manifest: `name<TAB>d0xd1...` per tensor.
void write_tensor_manifest(std::ostream& out, const ParameterStore& store);
// Replaces every value of `store` by the tensor of the same name; names and
// shapes must match exactly.
void load_into(ParameterStore& store, const std::map<std::string, Tensor>& tensors);

}  // namespace neuralign
