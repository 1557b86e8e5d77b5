#include "neuralign/jump.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_length(std::size_t target_length) {
  if (target_length < 1) throw ShapeError("target length must be at least 1");
}

// Number of valid offsets from `from` that fall into each bucket.
std::vector<int> bucket_multiplicity(std::size_t target_length, int from, int max_jump) {
  std::vector<int> n(bucket_count(max_jump), 0);
  const int I = static_cast<int>(target_length);
  for (int t = 1; t <= I; ++t) ++n[static_cast<std::size_t>(jump_bucket(t - from, max_jump))];
  return n;
}

template <typename BucketsOf>
Matrix build_transition(std::size_t target_length, int max_jump, double p0, BucketsOf buckets_of) {
  check_length(target_length);
  const std::size_t I = target_length;
  Matrix T(state_count(I), state_count(I));
  for (std::size_t i = 1; i <= I; ++i) {
    const std::vector<double> real = jump_row(buckets_of(i), max_jump, static_cast<int>(i), I);
    for (std::size_t s : {i - 1, I + i - 1}) {
      for (std::size_t t = 0; t < I; ++t) T(s, t) = (1.0 - p0) * real[t];
      T(s, I + i - 1) = p0;
    }
  }
  return T;
}

}  // namespace

int jump_bucket(int delta, int max_jump) {
  if (delta < -max_jump) return 0;
  if (delta > max_jump) return 2 * max_jump + 2;
  return delta + max_jump + 1;
}

std::string bucket_label(std::size_t bucket, int max_jump) {
  const int b = static_cast<int>(bucket);
  if (b == 0) return "<-" + std::to_string(max_jump);
  if (b == 2 * max_jump + 2) return ">+" + std::to_string(max_jump);
  const int delta = b - max_jump - 1;
  return (delta < 0 ? "-" : "+") + std::to_string(std::abs(delta));
}

std::vector<int> valid_buckets(std::size_t target_length, int from, int max_jump) {
  const auto n = bucket_multiplicity(target_length, from, max_jump);
  std::vector<int> out;
  for (std::size_t b = 0; b < n.size(); ++b)
    if (n[b] > 0) out.push_back(static_cast<int>(b));
  return out;
}

JumpTable JumpTable::uniform(int max_jump, double p0) {
  JumpTable t;
  t.max_jump = max_jump;
  t.buckets.assign(bucket_count(max_jump), 1.0 / static_cast<double>(bucket_count(max_jump)));
  t.p0 = p0;
  t.validate();
  return t;
}

void JumpTable::validate() const {
  if (max_jump < 1) throw ConfigError("max_jump must be at least 1");
  if (buckets.size() != bucket_count(max_jump)) throw DataError("jump table has the wrong number of buckets");
  double sum = 0.0;
  for (double b : buckets) {
    if (!(b >= 0.0)) throw DataError("jump table has a negative bucket");
    sum += b;
  }
  if (std::abs(sum - 1.0) > 1e-8) throw DataError("jump table buckets do not sum to 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0 must lie strictly between 0 and 1");
}

std::vector<double> jump_row(std::span<const double> buckets, int max_jump, int from, std::size_t target_length) {
  check_length(target_length);
  if (buckets.size() != bucket_count(max_jump)) throw ShapeError("bucket distribution has the wrong size");
  const auto n = bucket_multiplicity(target_length, from, max_jump);
  std::vector<double> row(target_length);
  double z = 0.0;
  for (std::size_t t = 0; t < target_length; ++t) {
    const auto b = static_cast<std::size_t>(jump_bucket(static_cast<int>(t + 1) - from, max_jump));
    row[t] = buckets[b] / n[b];
    z += row[t];
  }
  if (!(z > 0.0)) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(target_length));
    return row;
  }
  for (double& v : row) v /= z;
  return row;
}

Matrix transition_matrix(std::size_t target_length, const JumpTable& table) {
  return build_transition(target_length, table.max_jump, table.p0,
                          [&](std::size_t) { return std::span<const double>(table.buckets); });
}

Matrix transition_matrix(std::size_t target_length, const Matrix& bucket_probs, int max_jump, double p0) {
  if (bucket_probs.rows() != target_length || bucket_probs.cols() != bucket_count(max_jump)) {
    throw ShapeError("per-position bucket matrix must be [I x (2K+3)]");
  }
  return build_transition(target_length, max_jump, p0, [&](std::size_t i) { return bucket_probs.row(i - 1); });
}

std::vector<double> initial_distribution(std::size_t target_length, const JumpTable& table) {
  std::vector<double> init(state_count(target_length), 0.0);
  const auto real = jump_row(table.buckets, table.max_jump, 0, target_length);
  for (std::size_t t = 0; t < target_length; ++t) init[t] = (1.0 - table.p0) * real[t];
  init[target_length] = table.p0;
  return init;
}

JumpCounts::JumpCounts(int max_jump_) : max_jump(max_jump_), buckets(bucket_count(max_jump_), 0.0) {}

void JumpCounts::merge(const JumpCounts& other) {
  if (other.max_jump != max_jump) throw ConfigError("cannot merge jump counts with different max_jump");
  for (std::size_t b = 0; b < buckets.size(); ++b) buckets[b] += other.buckets[b];
  null_count += other.null_count;
  total += other.total;
  for (const auto& [key, v] : other.rows) rows[key] += v;
}

void JumpCounts::clear() { *this = JumpCounts(max_jump); }

void accumulate_jump_counts(const Posteriors& posteriors, JumpCounts& counts) {
  const std::size_t I = posteriors.target_length;
  const std::size_t S = state_count(I);
  auto add_real = [&](int from, int to, double w) {
    counts.buckets[static_cast<std::size_t>(jump_bucket(to - from, counts.max_jump))] += w;
    counts.rows[{I, from}] += w;
    counts.total += w;
  };
  if (posteriors.state.rows() > 0) {
    for (std::size_t s = 0; s < S; ++s) {
      const double g = posteriors.state(0, s);
      if (g == 0.0) continue;
      if (is_null_state(s, I)) {
        counts.null_count += g;
        counts.total += g;
      } else {
        add_real(0, state_position(s, I), g);
      }
    }
  }
  for (const Matrix& xi : posteriors.transition) {
    for (std::size_t s = 0; s < S; ++s) {
      const int from = state_position(s, I);
      for (std::size_t t = 0; t < S; ++t) {
        const double w = xi(s, t);
        if (w == 0.0) continue;
        if (is_null_state(t, I)) {
          counts.null_count += w;
          counts.total += w;
        } else {
          add_real(from, state_position(t, I), w);
        }
      }
    }
  }
}

JumpTable jump_m_step(std::span<const double> bucket_counts, double null_count, double total, int max_jump) {
  if (bucket_counts.size() != bucket_count(max_jump)) throw ShapeError("jump counts have the wrong size");
  JumpTable table;
  table.max_jump = max_jump;
  const double sum = std::accumulate(bucket_counts.begin(), bucket_counts.end(), 0.0);
  if (!(sum > 0.0)) {
    warn("jump counts are all zero; using uniform jump buckets");
    table.buckets.assign(bucket_count(max_jump), 1.0 / static_cast<double>(bucket_count(max_jump)));
  } else {
    for (double c : bucket_counts) {
      if (c < 0.0) throw DataError("negative jump count");
      table.buckets.push_back(c / sum);
    }
  }
  if (total > 0.0) {
    table.p0 = std::clamp(null_count / total, kMinP0, 1.0 - kMinP0);
  } else {
    table.p0 = kDefaultP0;
  }
  return table;
}

JumpTable jump_m_step(const JumpCounts& counts) {
  return jump_m_step(counts.buckets, counts.null_count, counts.total, counts.max_jump);
}

double jump_auxiliary(const JumpCounts& counts, const JumpTable& table) {
  auto term = [](double c, double p) {
    if (c == 0.0) return 0.0;
    return p > 0.0 ? c * std::log(p) : kNegInf;
  };
  double q = term(counts.null_count, table.p0) + term(counts.total - counts.null_count, 1.0 - table.p0);
  for (std::size_t b = 0; b < counts.buckets.size(); ++b) q += term(counts.buckets[b], table.buckets[b]);
  for (const auto& [key, n] : counts.rows) {
    double z = 0.0;
    for (int b : valid_buckets(key.first, key.second, counts.max_jump)) z += table.buckets[static_cast<std::size_t>(b)];
    q -= term(n, z);
  }
  return q;
}

JumpTable jump_m_step_exact(const JumpCounts& counts, const JumpTable& previous, int iterations) {
  JumpTable start = jump_m_step(counts);
  if (counts.empty()) return start;
  if (previous.buckets.size() == start.buckets.size() && previous.max_jump == counts.max_jump) {
    JumpTable prev = previous;
    prev.p0 = start.p0;
    if (jump_auxiliary(counts, prev) > jump_auxiliary(counts, start)) start = prev;
  }
  const std::size_t nb = bucket_count(counts.max_jump);
  std::vector<std::pair<double, std::vector<char>>> rows;
  for (const auto& [key, n] : counts.rows) {
    std::vector<char> valid(nb, 0);
    for (int b : valid_buckets(key.first, key.second, counts.max_jump)) valid[static_cast<std::size_t>(b)] = 1;
    rows.emplace_back(n, std::move(valid));
  }
  std::vector<double>& theta = start.buckets;
  for (int it = 0; it < iterations; ++it) {
    // Rejected draws: row r implicitly draws N_r * theta_b / Z_r from every
    // bucket that is invalid for it.
    std::vector<double> hidden(nb, 0.0);
    for (const auto& [n, valid] : rows) {
      double z = 0.0;
      for (std::size_t b = 0; b < nb; ++b)
        if (valid[b]) z += theta[b];
      if (!(z > 0.0)) continue;
      for (std::size_t b = 0; b < nb; ++b)
        if (!valid[b]) hidden[b] += n / z;
    }
    double sum = 0.0;
    std::vector<double> next(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      next[b] = counts.buckets[b] + theta[b] * hidden[b];
      sum += next[b];
    }
    if (!(sum > 0.0)) break;
    for (std::size_t b = 0; b < nb; ++b) theta[b] = next[b] / sum;
  }
  return start;
}

void write_jump_table(std::ostream& out, const JumpTable& table) {
  out << "max_jump\t" << table.max_jump << '\n';
  out << "p0\t" << format_double(table.p0) << '\n';
  for (std::size_t b = 0; b < table.buckets.size(); ++b)
    out << bucket_label(b, table.max_jump) << '\t' << format_double(table.buckets[b]) << '\n';
}

JumpTable read_jump_table(std::istream& in) {
  JumpTable table;
  table.buckets.clear();
  std::string line;
  int line_no = 0;
  bool have_k = false;
  bool have_p0 = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("jump table line " + std::to_string(line_no) + ": missing tab");
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    try {
      if (key == "max_jump") {
        table.max_jump = std::stoi(value);
        have_k = true;
      } else if (key == "p0") {
        table.p0 = std::stod(value);
        have_p0 = true;
      } else {
        if (!have_k) throw DataError("max_jump must come first");
        if (key != bucket_label(table.buckets.size(), table.max_jump)) throw DataError("unexpected bucket " + key);
        table.buckets.push_back(std::stod(value));
      }
    } catch (const std::logic_error&) {
      throw DataError("jump table line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (!have_k || !have_p0) throw DataError("jump table is missing max_jump or p0");
  table.validate();
  return table;
}

}  // namespace neuralign
