#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "neuralign/links.hpp"
#include "neuralign/matrix.hpp"

namespace neuralign::testing {

// Exhaustive enumeration of all (2I)^J state paths of the null-augmented HMM.
struct BruteForce {
  double log_likelihood = 0.0;
  Matrix state_posteriors;            // [J x 2I]
  std::vector<std::size_t> best_path;  // first maximum in lexicographic path order
  double best_log_score = 0.0;
};

// `transitions` holds one shared matrix or J-1 per-step matrices
// (probabilities); `emission_log` is [(I+1) x J] with row 0 the NULL word.
BruteForce brute_force(const Matrix& emission_log, std::span<const Matrix> transitions,
                       std::span<const double> initial);

// Same under the IBM-1 uniform 1/(2I) prior.
BruteForce brute_force_ibm1(const Matrix& emission_log);

// Probability of one path (not in log space).
double path_probability(const Matrix& emission_log, std::span<const Matrix> transitions,
                        std::span<const double> initial, std::span<const std::size_t> path);

// AER straight from its definition, sentence counts summed first.
double reference_aer(std::span<const LinkSet> predicted, std::span<const LinkSet> sure,
                     std::span<const LinkSet> possible);

}  // namespace neuralign::testing
