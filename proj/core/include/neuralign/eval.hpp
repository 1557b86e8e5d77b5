#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "neuralign/corpus.hpp"
#include "neuralign/links.hpp"

namespace neuralign {

struct AerReport {
  double aer = 0.0;
  double precision = 0.0;  // |A n P| / |A|
  double recall = 0.0;     // |A n S| / |S|
  std::size_t predicted = 0;
  std::size_t sure = 0;
  std::size_t possible = 0;
  std::size_t predicted_sure = 0;
  std::size_t predicted_possible = 0;
};

// Counts are summed over sentences before dividing. Sentence n of
// `predicted` is gold sentence n + 1; sentences absent from `gold` have no
// gold links.
AerReport aer(const AlignmentSet& predicted, const GoldCorpus& gold);
AerReport aer(const LinkSet& predicted, const LinkSet& sure, const LinkSet& possible);

// Writes `metric<TAB>value` lines with four decimals.
void write_aer_report(std::ostream& out, const AerReport& report);

struct AccuracyBreakdown {
  std::size_t null_correct = 0;
  std::size_t null_incorrect = 0;
  std::size_t link_correct = 0;
  std::size_t link_incorrect = 0;
  std::size_t total() const noexcept { return null_correct + null_incorrect + link_correct + link_incorrect; }
};

// Classifies every source-word decision. A link is correct when it is a
// possible link; a null decision is correct when the gold leaves the word
// unaligned.
AccuracyBreakdown accuracy_breakdown(const AlignmentSet& predicted, const GoldCorpus& gold,
                                     std::span<const SentenceLengths> lengths);

struct RecallCounts {
  std::size_t null_violated = 0;   // predicted link touching a word the gold leaves unaligned
  std::size_t nonnull_missed = 0;  // sure link absent from the prediction
};

// Group name of target word i (1-based) of sentence n (0-based).
using TargetGrouping = std::function<std::string(std::size_t sentence, int target)>;

// Recall errors grouped by the target word of the link involved.
std::map<std::string, RecallCounts> recall_breakdown(const AlignmentSet& predicted, const GoldCorpus& gold,
                                                     const TargetGrouping& group);
// "known" / "unknown" by membership of the target word in `vocab`.
TargetGrouping vocabulary_grouping(std::span<const SentencePair> test, const Vocabulary& vocab);
// "content" (NOUN, VERB, ADJ, ADV) / "function" from one tag per target token.
TargetGrouping pos_grouping(const std::vector<std::vector<std::string>>& tags);
bool is_content_tag(const std::string& tag);
// Reads a tag file parallel to the target side; token counts must match.
std::vector<std::vector<std::string>> load_pos_tags(const std::filesystem::path& path,
                                                    std::span<const SentencePair> test);

// (2K+3) x (2K+3) counts; rows are reference jumps, columns predicted jumps.
struct ConfusionMatrix {
  int max_jump = 5;
  std::vector<std::size_t> counts;

  explicit ConfusionMatrix(int max_jump = 5);
  std::size_t size() const noexcept { return static_cast<std::size_t>(2 * max_jump + 3); }
  std::size_t& at(std::size_t reference, std::size_t predicted) { return counts[reference * size() + predicted]; }
  std::size_t at(std::size_t reference, std::size_t predicted) const { return counts[reference * size() + predicted]; }
  std::size_t total() const;
};

// Median of a set of positions; with an even count the mean of the two
// middle positions rounded down.
int median_position(std::vector<int> positions);

// Jump confusion over source positions j >= 2. The reference location of a
// source word is the median of its possible-link targets. A position counts
// only when its reference and prediction exist and the previous word's
// predicted location equals its reference location.
ConfusionMatrix jump_confusion(const AlignmentSet& predicted, const GoldCorpus& gold, int max_jump = 5);

enum class SourceGroup { Frequent = 0, Infrequent = 1, Unseen = 2 };
enum class TargetGroup { Rare = 0, Unseen = 1, Other = 2 };

// Frequency groups built from training token counts: frequent source words
// cover 90% of the source tokens, the remaining seen words the other 10%;
// rare target words are the least frequent ones covering 1% of the target
// tokens.
class FrequencyBuckets {
 public:
  static FrequencyBuckets from_corpus(std::span<const SentencePair> training);
  static FrequencyBuckets from_counts(const std::vector<std::pair<std::string, std::size_t>>& source_counts,
                                      const std::vector<std::pair<std::string, std::size_t>>& target_counts);

  SourceGroup source_group(const std::string& word) const;
  TargetGroup target_group(const std::string& word) const;

 private:
  std::unordered_set<std::string> frequent_source_;
  std::unordered_set<std::string> seen_source_;
  std::unordered_set<std::string> rare_target_;
  std::unordered_set<std::string> seen_target_;
};

// Rows: source 90%, 10%, 0%. Columns: target 1%, 0%.
using GarbageTable = std::array<std::array<std::size_t, 2>, 3>;

// Incorrect (non-possible) predicted links whose target word is rare or
// unseen, by source group.
GarbageTable garbage_table(const AlignmentSet& predicted, const GoldCorpus& gold, std::span<const SentencePair> test,
                           const FrequencyBuckets& buckets);
void write_garbage_table(std::ostream& out, const GarbageTable& table);

// TSV with a "ref/pred" corner cell, column labels, then one labelled row
// per matrix row.
void emit_heatmap(std::ostream& out, const std::vector<std::vector<double>>& matrix,
                  const std::vector<std::string>& row_labels, const std::vector<std::string>& column_labels);
void emit_heatmap(std::ostream& out, const ConfusionMatrix& matrix);
void emit_heatmap(const std::filesystem::path& path, const ConfusionMatrix& matrix);

}  // namespace neuralign
