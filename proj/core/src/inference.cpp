#include "neuralign/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_emission(const Matrix& emission_log) {
  if (emission_log.rows() < 2 || emission_log.cols() < 1) {
    throw ShapeError("emission matrix must be [(I+1) x J] with I, J >= 1");
  }
}

// Emission probabilities per state, scaled by the column maximum.
// Returns [J x 2I] and the per-column log shifts.
Matrix scaled_emissions(const Matrix& emission_log, std::vector<double>& shifts) {
  const std::size_t I = emission_log.rows() - 1;
  const std::size_t J = emission_log.cols();
  const std::size_t S = state_count(I);
  Matrix b(J, S);
  shifts.assign(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    double mx = kNegInf;
    for (std::size_t r = 0; r <= I; ++r) mx = std::max(mx, emission_log(r, j));
    if (mx == kNegInf) {
      throw ZeroProbabilityError("source position " + std::to_string(j + 1) + " has zero probability in every state");
    }
    shifts[j] = mx;
    for (std::size_t s = 0; s < S; ++s) b(j, s) = std::exp(emission_log(emission_row(s, I), j) - mx);
  }
  return b;
}

}  // namespace

Posteriors ibm1_posteriors(const Matrix& emission_log) {
  check_emission(emission_log);
  const std::size_t I = emission_log.rows() - 1;
  const std::size_t J = emission_log.cols();
  const std::size_t S = state_count(I);
  std::vector<double> shifts;
  const Matrix b = scaled_emissions(emission_log, shifts);
  Posteriors post;
  post.target_length = I;
  post.state = Matrix(J, S);
  for (std::size_t j = 0; j < J; ++j) {
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) total += b(j, s);
    for (std::size_t s = 0; s < S; ++s) post.state(j, s) = b(j, s) / total;
    post.log_likelihood += shifts[j] + std::log(total / static_cast<double>(S));
  }
  return post;
}

double ibm1_log_likelihood(const Matrix& emission_log) { return ibm1_posteriors(emission_log).log_likelihood; }

Posteriors forward_backward(const Matrix& emission_log, std::span<const Matrix> transitions,
                            std::span<const double> initial) {
  check_emission(emission_log);
  const std::size_t I = emission_log.rows() - 1;
  const std::size_t J = emission_log.cols();
  const std::size_t S = state_count(I);
  if (initial.size() != S) throw ShapeError("initial distribution must have 2I entries");
  if (J > 1 && transitions.size() != 1 && transitions.size() != J - 1) {
    throw ShapeError("forward_backward needs one shared or J-1 transition matrices");
  }
  for (const auto& t : transitions) {
    if (t.rows() != S || t.cols() != S) throw ShapeError("transition matrix must be [2I x 2I]");
  }
  auto transition_at = [&](std::size_t j) -> const Matrix& {  // drives j-1 -> j, j >= 1 (0-based)
    return transitions.size() == 1 ? transitions[0] : transitions[j - 1];
  };

  std::vector<double> shifts;
  const Matrix b = scaled_emissions(emission_log, shifts);
  Matrix alpha(J, S);
  std::vector<double> scale(J, 0.0);
  for (std::size_t s = 0; s < S; ++s) alpha(0, s) = initial[s] * b(0, s);
  for (std::size_t j = 0; j < J; ++j) {
    if (j > 0) {
      const Matrix& T = transition_at(j);
      for (std::size_t s = 0; s < S; ++s) {
        const double a = alpha(j - 1, s);
        if (a == 0.0) continue;
        for (std::size_t t = 0; t < S; ++t) alpha(j, t) += a * T(s, t);
      }
      for (std::size_t t = 0; t < S; ++t) alpha(j, t) *= b(j, t);
    }
    double c = 0.0;
    for (std::size_t s = 0; s < S; ++s) c += alpha(j, s);
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ZeroProbabilityError("sentence has zero probability at source position " + std::to_string(j + 1));
    }
    scale[j] = c;
    for (std::size_t s = 0; s < S; ++s) alpha(j, s) /= c;
  }

  Matrix beta(J, S, 0.0);
  for (std::size_t s = 0; s < S; ++s) beta(J - 1, s) = 1.0;
  for (std::size_t j = J - 1; j > 0; --j) {
    const Matrix& T = transition_at(j);
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t t = 0; t < S; ++t) acc += T(s, t) * b(j, t) * beta(j, t);
      beta(j - 1, s) = acc / scale[j];
    }
  }

  Posteriors post;
  post.target_length = I;
  post.state = Matrix(J, S);
  for (std::size_t j = 0; j < J; ++j) {
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      post.state(j, s) = alpha(j, s) * beta(j, s);
      total += post.state(j, s);
    }
    for (std::size_t s = 0; s < S; ++s) post.state(j, s) /= total;
    post.log_likelihood += std::log(scale[j]) + shifts[j];
  }
  post.transition.reserve(J > 0 ? J - 1 : 0);
  for (std::size_t j = 1; j < J; ++j) {
    const Matrix& T = transition_at(j);
    Matrix xi(S, S);
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double a = alpha(j - 1, s);
      if (a == 0.0) continue;
      for (std::size_t t = 0; t < S; ++t) {
        const double v = a * T(s, t) * b(j, t) * beta(j, t) / scale[j];
        xi(s, t) = v;
        total += v;
      }
    }
    for (auto& v : xi.data()) v /= total;
    post.transition.push_back(std::move(xi));
  }
  return post;
}

double em_auxiliary(const Posteriors& posteriors, const Matrix& emission_log, std::span<const Matrix> transition_log,
                    std::span<const double> initial_log) {
  const std::size_t I = posteriors.target_length;
  const std::size_t J = posteriors.state.rows();
  const std::size_t S = state_count(I);
  if (emission_log.rows() != I + 1 || emission_log.cols() != J) throw ShapeError("em_auxiliary: emission shape");
  auto term = [](double weight, double logp) {
    if (weight == 0.0) return 0.0;
    if (logp == kNegInf) throw Error("em_auxiliary: -infinity term with positive posterior");
    return weight * logp;
  };
  double q = 0.0;
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t s = 0; s < S; ++s) q += term(posteriors.state(j, s), emission_log(emission_row(s, I), j));
  if (!transition_log.empty()) {
    if (transition_log.size() != 1 && transition_log.size() != posteriors.transition.size()) {
      throw ShapeError("em_auxiliary: transition count");
    }
    for (std::size_t k = 0; k < posteriors.transition.size(); ++k) {
      const Matrix& logt = transition_log.size() == 1 ? transition_log[0] : transition_log[k];
      const Matrix& xi = posteriors.transition[k];
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t t = 0; t < S; ++t) q += term(xi(s, t), logt(s, t));
    }
  }
  if (!initial_log.empty()) {
    for (std::size_t s = 0; s < S; ++s) q += term(posteriors.state(0, s), initial_log[s]);
  }
  return q;
}

}  // namespace neuralign
