#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "neuralign/corpus.hpp"
#include "neuralign/jump.hpp"
#include "neuralign/matrix.hpp"

namespace neuralign {

// Sparse t(f | e). Rows are indexed by target id (kNullId is the NULL word);
// each row holds (source id, probability) entries sorted by source id.
class TranslationTable {
 public:
  struct Entry {
    int source = 0;
    double prob = 0.0;
  };

  TranslationTable() = default;
  explicit TranslationTable(std::size_t target_vocab_size) : rows_(target_vocab_size) {}

  // t(f|e) uniform over the source words co-occurring with e (NULL
  // co-occurs with every source word).
  static TranslationTable uniform_cooccurrence(std::span<const SentencePair> pairs, std::size_t target_vocab_size);

  std::size_t target_size() const noexcept { return rows_.size(); }
  std::size_t entry_count() const;
  // 0 when (e, f) is not in the table.
  double prob(int target, int source) const;
  std::span<const Entry> row(int target) const { return rows_.at(static_cast<std::size_t>(target)); }
  // Replaces a row; entries are sorted by source id.
  void set_row(int target, std::vector<Entry> entries);
  // Position of `source` in row `target`, or -1.
  std::ptrdiff_t find(int target, int source) const;

  // `e<TAB>f<TAB>prob` lines ordered by (e, f) id. With vocabularies the
  // words are written; otherwise ids.
  void write(std::ostream& out) const;
  void write(std::ostream& out, const Vocabulary& source_vocab, const Vocabulary& target_vocab) const;
  // Reads the id form written by write(out).
  static TranslationTable read(std::istream& in, std::size_t target_vocab_size);

 private:
  std::vector<std::vector<Entry>> rows_;
};

// Log t(f_j | e) as [(I+1) x J]; row 0 is the NULL word. Pairs missing from
// the table get log(floor), or -infinity when floor is 0.
Matrix emission_logprobs(const TranslationTable& table, const SentencePair& pair, double floor = 0.0);

struct Ibm1StepResult {
  TranslationTable table;
  // Corpus log-likelihood under the table before the update.
  double log_likelihood = 0.0;
  std::size_t skipped = 0;
};

struct HmmStepResult {
  TranslationTable table;
  JumpTable jump;
  JumpCounts counts;
  double log_likelihood = 0.0;
  std::size_t skipped = 0;
};

// One exact EM iteration of IBM-1 with the uniform 1/(2I) alignment prior.
Ibm1StepResult ibm1_em_step(std::span<const SentencePair> pairs, const TranslationTable& table,
                            std::size_t threads = 1);

// One EM iteration of the discrete HMM: forward-backward posteriors update
// both the translation table and the jump table.
HmmStepResult hmm_em_step(std::span<const SentencePair> pairs, const TranslationTable& table,
                          const JumpTable& jump, std::size_t threads = 1);

}  // namespace neuralign
