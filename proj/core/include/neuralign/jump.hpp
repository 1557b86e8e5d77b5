#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "neuralign/inference.hpp"
#include "neuralign/matrix.hpp"

namespace neuralign {

inline constexpr int kDefaultMaxJump = 5;
inline constexpr double kDefaultP0 = 0.2;
inline constexpr double kMinP0 = 1e-4;

// Buckets are indexed 0 = LOW (jump < -K), 1..2K+1 = jumps -K..+K,
// 2K+2 = HIGH (jump > +K).
inline std::size_t bucket_count(int max_jump) { return static_cast<std::size_t>(2 * max_jump + 3); }
int jump_bucket(int delta, int max_jump);
// "<-5", "-5", ..., "+0", ..., "+5", ">+5".
std::string bucket_label(std::size_t bucket, int max_jump);

// Buckets reachable from position `from` (0 = virtual start) in a target
// sentence of length I, ascending.
std::vector<int> valid_buckets(std::size_t target_length, int from, int max_jump);

struct JumpTable {
  int max_jump = kDefaultMaxJump;
  std::vector<double> buckets;
  double p0 = kDefaultP0;

  static JumpTable uniform(int max_jump = kDefaultMaxJump, double p0 = kDefaultP0);
  void validate() const;
};

// Distribution over real target positions 1..I when jumping from `from`
// (0 = virtual start). Offsets inside [-K, K] take their bucket value, the
// overflow buckets are split uniformly over their valid offsets, and the
// result is renormalised to 1 (uniform if every valid bucket is zero).
std::vector<double> jump_row(std::span<const double> buckets, int max_jump, int from, std::size_t target_length);

// [2I x 2I] transition matrix sharing one bucket distribution.
Matrix transition_matrix(std::size_t target_length, const JumpTable& table);
// Same with a bucket distribution per from-position: row i-1 of
// `bucket_probs` [I x (2K+3)] is used when leaving position i.
Matrix transition_matrix(std::size_t target_length, const Matrix& bucket_probs, int max_jump, double p0);

// Jump from virtual position 0, scaled by (1 - p0); p0 goes to null copy 1'.
std::vector<double> initial_distribution(std::size_t target_length, const JumpTable& table);

// Expected jump statistics collected from HMM posteriors.
struct JumpCounts {
  int max_jump = kDefaultMaxJump;
  std::vector<double> buckets;
  double null_count = 0.0;
  double total = 0.0;
  // Expected real transitions per (target length, from position); from 0 is
  // the initial step. Needed to renormalise over valid offsets exactly.
  std::map<std::pair<std::size_t, int>, double> rows;

  explicit JumpCounts(int max_jump = kDefaultMaxJump);
  void merge(const JumpCounts& other);
  void clear();
  bool empty() const noexcept { return total <= 0.0; }
};

// Adds the transition posteriors and the initial-step posterior.
void accumulate_jump_counts(const Posteriors& posteriors, JumpCounts& counts);

// Normalised expected counts; p0 = null / total clamped to
// [1e-4, 1 - 1e-4]. All-zero counts give uniform buckets with a warning.
JumpTable jump_m_step(std::span<const double> bucket_counts, double null_count, double total,
                      int max_jump = kDefaultMaxJump);
JumpTable jump_m_step(const JumpCounts& counts);

// Jump part of the EM auxiliary (bucket and p0 terms, offset constants
// dropped) for the counts in `counts`.
double jump_auxiliary(const JumpCounts& counts, const JumpTable& table);

// M-step that accounts for the per-row renormalisation over valid offsets:
// starts from the better of the normalised counts and `previous`, then runs
// EM iterations on the truncated multinomial. Never decreases
// jump_auxiliary relative to `previous`.
JumpTable jump_m_step_exact(const JumpCounts& counts, const JumpTable& previous, int iterations = 50);

void write_jump_table(std::ostream& out, const JumpTable& table);
JumpTable read_jump_table(std::istream& in);

}  // namespace neuralign
