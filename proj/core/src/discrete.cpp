#include "neuralign/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "neuralign/errors.hpp"
#include "neuralign/inference.hpp"
#include "parallel.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Expected counts laid out like the table rows.
using CountRows = std::vector<std::vector<double>>;

CountRows zero_counts(const TranslationTable& table) {
  CountRows c(table.target_size());
  for (std::size_t e = 0; e < c.size(); ++e) c[e].assign(table.row(static_cast<int>(e)).size(), 0.0);
  return c;
}

void add_translation_counts(const TranslationTable& table, const SentencePair& pair, const Posteriors& post,
                            CountRows& counts) {
  const std::size_t I = pair.target_length();
  for (std::size_t j = 0; j < pair.source_length(); ++j) {
    const int f = pair.source[j];
    double null_mass = 0.0;
    for (std::size_t s = 0; s < state_count(I); ++s) {
      const double g = post.state(j, s);
      if (g == 0.0) continue;
      if (is_null_state(s, I)) {
        null_mass += g;
        continue;
      }
      const int e = pair.target[s];
      const auto k = table.find(e, f);
      if (k < 0) throw Error("posterior mass on a pair missing from the translation table");
      counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] += g;
    }
    if (null_mass > 0.0) {
      const auto k = table.find(kNullId, f);
      if (k < 0) throw Error("posterior mass on a NULL pair missing from the translation table");
      counts[kNullId][static_cast<std::size_t>(k)] += null_mass;
    }
  }
}

void merge_counts(CountRows& into, const CountRows& from) {
  for (std::size_t e = 0; e < into.size(); ++e)
    for (std::size_t k = 0; k < into[e].size(); ++k) into[e][k] += from[e][k];
}

TranslationTable normalize_counts(const TranslationTable& table, const CountRows& counts) {
  TranslationTable next = table;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    const auto row = table.row(static_cast<int>(e));
    if (row.empty()) continue;
    double sum = 0.0;
    for (double c : counts[e]) sum += c;
    if (!(sum > 0.0)) continue;  // unseen in this pass: keep the previous row
    std::vector<TranslationTable::Entry> entries(row.begin(), row.end());
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k].prob = counts[e][k] / sum;
    next.set_row(static_cast<int>(e), std::move(entries));
  }
  return next;
}

}  // namespace

TranslationTable TranslationTable::uniform_cooccurrence(std::span<const SentencePair> pairs,
                                                        std::size_t target_vocab_size) {
  std::vector<std::set<int>> support(target_vocab_size);
  for (const auto& p : pairs) {
    for (int e : p.target) {
      if (e < 0 || static_cast<std::size_t>(e) >= target_vocab_size) throw DataError("target id out of range");
      support[static_cast<std::size_t>(e)].insert(p.source.begin(), p.source.end());
    }
    if (target_vocab_size > static_cast<std::size_t>(kNullId)) support[kNullId].insert(p.source.begin(), p.source.end());
  }
  TranslationTable table(target_vocab_size);
  for (std::size_t e = 0; e < target_vocab_size; ++e) {
    if (support[e].empty()) continue;
    const double u = 1.0 / static_cast<double>(support[e].size());
    std::vector<Entry> row;
    row.reserve(support[e].size());
    for (int f : support[e]) row.push_back({f, u});
    table.rows_[e] = std::move(row);
  }
  return table;
}

std::size_t TranslationTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

std::ptrdiff_t TranslationTable::find(int target, int source) const {
  if (target < 0 || static_cast<std::size_t>(target) >= rows_.size()) return -1;
  const auto& r = rows_[static_cast<std::size_t>(target)];
  const auto it = std::lower_bound(r.begin(), r.end(), source, [](const Entry& a, int f) { return a.source < f; });
  if (it == r.end() || it->source != source) return -1;
  return it - r.begin();
}

double TranslationTable::prob(int target, int source) const {
  const auto k = find(target, source);
  return k < 0 ? 0.0 : rows_[static_cast<std::size_t>(target)][static_cast<std::size_t>(k)].prob;
}

void TranslationTable::set_row(int target, std::vector<Entry> entries) {
  if (target < 0) throw DataError("negative target id");
  if (static_cast<std::size_t>(target) >= rows_.size()) rows_.resize(static_cast<std::size_t>(target) + 1);
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.source < b.source; });
  rows_[static_cast<std::size_t>(target)] = std::move(entries);
}

void TranslationTable::write(std::ostream& out) const {
  for (std::size_t e = 0; e < rows_.size(); ++e)
    for (const auto& en : rows_[e]) out << e << '\t' << en.source << '\t' << format_double(en.prob) << '\n';
}

void TranslationTable::write(std::ostream& out, const Vocabulary& source_vocab,
                             const Vocabulary& target_vocab) const {
  for (std::size_t e = 0; e < rows_.size(); ++e)
    for (const auto& en : rows_[e])
      out << target_vocab.word(static_cast<int>(e)) << '\t' << source_vocab.word(en.source) << '\t'
          << format_double(en.prob) << '\n';
}

TranslationTable TranslationTable::read(std::istream& in, std::size_t target_vocab_size) {
  std::vector<std::vector<Entry>> rows(target_vocab_size);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long e = -1;
    Entry en;
    if (!(ss >> e >> en.source >> en.prob) || e < 0 || static_cast<std::size_t>(e) >= target_vocab_size ||
        en.source < 0) {
      throw DataError("malformed translation table line " + std::to_string(line_no));
    }
    rows[static_cast<std::size_t>(e)].push_back(en);
  }
  TranslationTable table(target_vocab_size);
  for (std::size_t e = 0; e < rows.size(); ++e)
    if (!rows[e].empty()) table.set_row(static_cast<int>(e), std::move(rows[e]));
  return table;
}

Matrix emission_logprobs(const TranslationTable& table, const SentencePair& pair, double floor) {
  const std::size_t I = pair.target_length();
  const std::size_t J = pair.source_length();
  Matrix m(I + 1, J);
  const double log_floor = floor > 0.0 ? std::log(floor) : kNegInf;
  for (std::size_t r = 0; r <= I; ++r) {
    const int e = r == 0 ? kNullId : pair.target[r - 1];
    for (std::size_t j = 0; j < J; ++j) {
      const double p = table.prob(e, pair.source[j]);
      m(r, j) = p > 0.0 ? std::max(std::log(p), log_floor) : log_floor;
    }
  }
  return m;
}

Ibm1StepResult ibm1_em_step(std::span<const SentencePair> pairs, const TranslationTable& table,
                            std::size_t threads) {
  threads = std::max<std::size_t>(1, threads);
  std::vector<CountRows> counts(threads);
  std::vector<double> ll(threads, 0.0);
  std::vector<std::size_t> skipped(threads, 0);
  detail::parallel_chunks(pairs.size(), threads, [&](std::size_t w, std::size_t begin, std::size_t end) {
    counts[w] = zero_counts(table);
    for (std::size_t n = begin; n < end; ++n) {
      Posteriors post;
      try {
        post = ibm1_posteriors(emission_logprobs(table, pairs[n]));
      } catch (const ZeroProbabilityError&) {
        ++skipped[w];
        continue;
      }
      ll[w] += post.log_likelihood;
      add_translation_counts(table, pairs[n], post, counts[w]);
    }
  });
  Ibm1StepResult result;
  CountRows total = zero_counts(table);
  for (std::size_t w = 0; w < threads; ++w) {
    if (counts[w].empty()) continue;
    merge_counts(total, counts[w]);
    result.log_likelihood += ll[w];
    result.skipped += skipped[w];
  }
  if (result.skipped > 0) warn(std::to_string(result.skipped) + " sentence(s) with zero likelihood skipped");
  result.table = normalize_counts(table, total);
  return result;
}

HmmStepResult hmm_em_step(std::span<const SentencePair> pairs, const TranslationTable& table,
                          const JumpTable& jump, std::size_t threads) {
  threads = std::max<std::size_t>(1, threads);
  std::vector<CountRows> counts(threads);
  std::vector<JumpCounts> jumps(threads, JumpCounts(jump.max_jump));
  std::vector<double> ll(threads, 0.0);
  std::vector<std::size_t> skipped(threads, 0);
  detail::parallel_chunks(pairs.size(), threads, [&](std::size_t w, std::size_t begin, std::size_t end) {
    counts[w] = zero_counts(table);
    for (std::size_t n = begin; n < end; ++n) {
      const auto& pair = pairs[n];
      const std::size_t I = pair.target_length();
      const Matrix T = transition_matrix(I, jump);
      const auto init = initial_distribution(I, jump);
      Posteriors post;
      try {
        post = forward_backward(emission_logprobs(table, pair), std::span<const Matrix>(&T, 1), init);
      } catch (const ZeroProbabilityError&) {
        ++skipped[w];
        continue;
      }
      ll[w] += post.log_likelihood;
      add_translation_counts(table, pair, post, counts[w]);
      accumulate_jump_counts(post, jumps[w]);
    }
  });
  HmmStepResult result;
  result.counts = JumpCounts(jump.max_jump);
  CountRows total = zero_counts(table);
  for (std::size_t w = 0; w < threads; ++w) {
    if (counts[w].empty()) continue;
    merge_counts(total, counts[w]);
    result.counts.merge(jumps[w]);
    result.log_likelihood += ll[w];
    result.skipped += skipped[w];
  }
  if (result.skipped > 0) warn(std::to_string(result.skipped) + " sentence(s) with zero likelihood skipped");
  result.table = normalize_counts(table, total);
  result.jump = jump_m_step_exact(result.counts, jump);
  return result;
}

}  // namespace neuralign
