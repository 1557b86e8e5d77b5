#pragma once

#include <functional>
#include <vector>

#include "neuralign/params.hpp"
#include "neuralign/tensor.hpp"

namespace neuralign {

// Builds a scalar loss on a fresh graph. Must be deterministic.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Compares analytic gradients of `loss` with central finite differences for
// every coordinate of `tensors`. The relative error of a coordinate is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
GradCheckResult grad_check(const LossBuilder& loss, const std::vector<Tensor*>& tensors, double eps = 1e-5);
GradCheckResult grad_check(const LossBuilder& loss, ParameterStore& params, double eps = 1e-5);

}  // namespace neuralign
