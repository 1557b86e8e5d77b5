#include "neuralign/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

double evaluate(const LossBuilder& loss) {
  Graph graph(false);
  const double value = loss(graph).scalar();
  if (!std::isfinite(value)) throw Error("grad_check: loss is not finite");
  return value;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, const std::vector<Tensor*>& tensors, double eps) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");
  for (auto* t : tensors) t->zero_grad();
  {
    Graph graph;
    Var root = loss(graph);
    if (!std::isfinite(root.scalar())) throw Error("grad_check: loss is not finite");
    graph.backward(root);
  }
  GradCheckResult result;
  for (auto* t : tensors) {
    const std::vector<double> analytic = t->grad();
    auto& values = t->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(loss);
      values[i] = saved - eps;
      const double down = evaluate(loss);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-3});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
      ++result.coordinates;
    }
  }
  return result;
}

GradCheckResult grad_check(const LossBuilder& loss, ParameterStore& params, double eps) {
  std::vector<Tensor*> tensors;
  for (auto& [name, p] : params) tensors.push_back(&p.value);
  return grad_check(loss, tensors, eps);
}

}  // namespace neuralign
