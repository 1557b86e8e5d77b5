#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "neuralign/matrix.hpp"

namespace neuralign {

// HMM state layout for a target sentence of length I: states 0..I-1 are the
// real positions 1..I, states I..2I-1 are their null copies 1'..I'.
// Emission matrices are [(I+1) x J] in log space: row 0 is the NULL word,
// row i the target word e_i, column j-1 the source word f_j.

inline std::size_t state_count(std::size_t target_length) { return 2 * target_length; }
// 1-based target position remembered by `state`.
inline int state_position(std::size_t state, std::size_t target_length) {
  return static_cast<int>(state < target_length ? state : state - target_length) + 1;
}
inline bool is_null_state(std::size_t state, std::size_t target_length) { return state >= target_length; }
// Emission row of `state`: null copies share the NULL row.
inline std::size_t emission_row(std::size_t state, std::size_t target_length) {
  return state < target_length ? state + 1 : 0;
}

struct Posteriors {
  std::size_t target_length = 0;
  // gamma: [J x 2I], posterior of source position j being emitted by state s.
  Matrix state;
  // xi: J-1 matrices [2I x 2I]; entry (s, s') of matrix j-1 is the posterior
  // of states (s, s') at positions (j-1, j). Empty for IBM-1.
  std::vector<Matrix> transition;
  double log_likelihood = 0.0;
};

// IBM-1 posteriors under the uniform 1/(2I) prior over all 2I states.
Posteriors ibm1_posteriors(const Matrix& emission_log);

// IBM-1 corpus contribution log sum_s (1/2I) p(f_j | s), summed over j.
double ibm1_log_likelihood(const Matrix& emission_log);

// Scaled forward-backward. `transitions` holds either one [2I x 2I] matrix
// shared by every position or J-1 matrices (entry j-1 drives j-1 -> j).
// Throws ZeroProbabilityError when the sentence has zero likelihood.
Posteriors forward_backward(const Matrix& emission_log, std::span<const Matrix> transitions,
                            std::span<const double> initial);

// Expected complete-data log-likelihood:
//   sum_j sum_s gamma_j(s) log p(f_j | s)
//   + sum_j sum_{s,s'} xi_j(s, s') log p(s' | s)   (only if transition_log given)
//   + sum_s gamma_1(s) log initial(s)               (only if initial_log given)
// Throws when a -infinity term carries positive posterior mass.
double em_auxiliary(const Posteriors& posteriors, const Matrix& emission_log,
                    std::span<const Matrix> transition_log = {}, std::span<const double> initial_log = {});

}  // namespace neuralign
