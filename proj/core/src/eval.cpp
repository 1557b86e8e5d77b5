#include "neuralign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "neuralign/errors.hpp"
#include "neuralign/jump.hpp"
#include "neuralign/utf8.hpp"

namespace neuralign {

namespace {

const GoldAlignment& gold_for(const GoldCorpus& gold, std::size_t sentence) {
  static const GoldAlignment kEmpty;
  const auto it = gold.find(sentence + 1);
  return it == gold.end() ? kEmpty : it->second;
}

void check_coverage(const AlignmentSet& predicted, const GoldCorpus& gold) {
  if (!gold.empty() && gold.rbegin()->first > predicted.size()) {
    throw DataError("gold refers to sentence " + std::to_string(gold.rbegin()->first) + " but only " +
                    std::to_string(predicted.size()) + " sentences were predicted");
  }
}

std::set<int> aligned_sources(const LinkSet& links) {
  std::set<int> out;
  for (const auto& l : links) out.insert(l.source);
  return out;
}

std::set<int> aligned_targets(const LinkSet& links) {
  std::set<int> out;
  for (const auto& l : links) out.insert(l.target);
  return out;
}

// Locations per source position.
std::map<int, std::vector<int>> locations(const LinkSet& links) {
  std::map<int, std::vector<int>> out;
  for (const auto& l : links) out[l.source].push_back(l.target);
  return out;
}

std::string format_cell(double v) {
  char buf[64];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

using CountList = std::vector<std::pair<std::string, std::size_t>>;

CountList count_words(std::span<const SentencePair> pairs, bool source) {
  std::unordered_map<std::string, std::size_t> index;
  CountList counts;
  for (const auto& p : pairs) {
    for (const auto& w : source ? p.source_words : p.target_words) {
      const auto [it, inserted] = index.emplace(w, counts.size());
      if (inserted) counts.emplace_back(w, 0);
      ++counts[it->second].second;
    }
  }
  return counts;
}

}  // namespace

AerReport aer(const LinkSet& predicted, const LinkSet& sure, const LinkSet& possible) {
  AerReport r;
  r.predicted = predicted.size();
  r.sure = sure.size();
  r.possible = possible.size();
  for (const auto& l : predicted) {
    if (sure.count(l)) ++r.predicted_sure;
    if (possible.count(l)) ++r.predicted_possible;
  }
  const std::size_t denom = r.predicted + r.sure;
  if (denom == 0) {
    warn("AER undefined for empty prediction and empty sure set; reporting 0");
    r.aer = 0.0;
  } else {
    r.aer = 1.0 - static_cast<double>(r.predicted_sure + r.predicted_possible) / static_cast<double>(denom);
  }
  r.precision = r.predicted ? static_cast<double>(r.predicted_possible) / static_cast<double>(r.predicted) : 0.0;
  r.recall = r.sure ? static_cast<double>(r.predicted_sure) / static_cast<double>(r.sure) : 0.0;
  return r;
}

AerReport aer(const AlignmentSet& predicted, const GoldCorpus& gold) {
  check_coverage(predicted, gold);
  AerReport total;
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const GoldAlignment& g = gold_for(gold, n);
    total.predicted += predicted[n].size();
    total.sure += g.sure.size();
    total.possible += g.possible.size();
    for (const auto& l : predicted[n]) {
      if (g.sure.count(l)) ++total.predicted_sure;
      if (g.possible.count(l)) ++total.predicted_possible;
    }
  }
  const std::size_t denom = total.predicted + total.sure;
  if (denom == 0) {
    warn("AER undefined for empty prediction and empty sure set; reporting 0");
  } else {
    total.aer = 1.0 - static_cast<double>(total.predicted_sure + total.predicted_possible) / static_cast<double>(denom);
  }
  total.precision =
      total.predicted ? static_cast<double>(total.predicted_possible) / static_cast<double>(total.predicted) : 0.0;
  total.recall = total.sure ? static_cast<double>(total.predicted_sure) / static_cast<double>(total.sure) : 0.0;
  return total;
}

void write_aer_report(std::ostream& out, const AerReport& r) {
  char buf[128];
  auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%s\t%.4f\n", name, v);
    out << buf;
  };
  line("aer", r.aer);
  line("precision", r.precision);
  line("recall", r.recall);
  out << "predicted\t" << r.predicted << '\n';
  out << "sure\t" << r.sure << '\n';
  out << "possible\t" << r.possible << '\n';
}

AccuracyBreakdown accuracy_breakdown(const AlignmentSet& predicted, const GoldCorpus& gold,
                                     std::span<const SentenceLengths> lengths) {
  check_coverage(predicted, gold);
  if (lengths.size() != predicted.size()) throw DataError("accuracy_breakdown: sentence count mismatch");
  AccuracyBreakdown out;
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const GoldAlignment& g = gold_for(gold, n);
    const auto gold_aligned = aligned_sources(g.possible);
    const auto pred = locations(predicted[n]);
    for (std::size_t j = 1; j <= lengths[n].source; ++j) {
      const int jj = static_cast<int>(j);
      const auto it = pred.find(jj);
      if (it == pred.end()) {
        if (gold_aligned.count(jj)) {
          ++out.null_incorrect;
        } else {
          ++out.null_correct;
        }
        continue;
      }
      for (int i : it->second) {
        if (g.possible.count({jj, i})) {
          ++out.link_correct;
        } else {
          ++out.link_incorrect;
        }
      }
    }
  }
  return out;
}

std::map<std::string, RecallCounts> recall_breakdown(const AlignmentSet& predicted, const GoldCorpus& gold,
                                                     const TargetGrouping& group) {
  check_coverage(predicted, gold);
  std::map<std::string, RecallCounts> out;
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const GoldAlignment& g = gold_for(gold, n);
    const auto gold_sources = aligned_sources(g.possible);
    const auto gold_targets = aligned_targets(g.possible);
    for (const auto& l : predicted[n]) {
      if (!gold_sources.count(l.source) || !gold_targets.count(l.target)) ++out[group(n, l.target)].null_violated;
    }
    for (const auto& l : g.sure) {
      if (!predicted[n].count(l)) ++out[group(n, l.target)].nonnull_missed;
    }
  }
  return out;
}

TargetGrouping vocabulary_grouping(std::span<const SentencePair> test, const Vocabulary& vocab) {
  return [test, &vocab](std::size_t n, int i) -> std::string {
    const auto& words = test[n].target_words;
    if (i < 1 || static_cast<std::size_t>(i) > words.size()) throw DataError("target index out of range");
    return vocab.contains(words[static_cast<std::size_t>(i - 1)]) ? "known" : "unknown";
  };
}

bool is_content_tag(const std::string& tag) {
  return tag == "NOUN" || tag == "VERB" || tag == "ADJ" || tag == "ADV";
}

TargetGrouping pos_grouping(const std::vector<std::vector<std::string>>& tags) {
  return [tags](std::size_t n, int i) -> std::string {
    if (n >= tags.size() || i < 1 || static_cast<std::size_t>(i) > tags[n].size()) {
      throw DataError("no POS tag for sentence " + std::to_string(n + 1) + " target " + std::to_string(i));
    }
    return is_content_tag(tags[n][static_cast<std::size_t>(i - 1)]) ? "content" : "function";
  };
}

std::vector<std::vector<std::string>> load_pos_tags(const std::filesystem::path& path,
                                                    std::span<const SentencePair> test) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open POS file " + path.string());
  std::vector<std::vector<std::string>> tags;
  std::string line;
  while (std::getline(in, line)) tags.push_back(split_whitespace(line));
  if (tags.size() != test.size()) {
    throw DataError("POS file has " + std::to_string(tags.size()) + " lines, expected " + std::to_string(test.size()));
  }
  for (std::size_t n = 0; n < tags.size(); ++n) {
    if (tags[n].size() != test[n].target_length()) {
      throw DataError("POS line " + std::to_string(n + 1) + " has " + std::to_string(tags[n].size()) +
                      " tags for " + std::to_string(test[n].target_length()) + " tokens");
    }
  }
  return tags;
}

ConfusionMatrix::ConfusionMatrix(int max_jump_) : max_jump(max_jump_), counts(size() * size(), 0) {}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

int median_position(std::vector<int> positions) {
  if (positions.empty()) throw Error("median of an empty set");
  std::sort(positions.begin(), positions.end());
  const std::size_t n = positions.size();
  if (n % 2 == 1) return positions[n / 2];
  const int a = positions[n / 2 - 1];
  const int b = positions[n / 2];
  // floor of the mean, also for negative sums
  const int s = a + b;
  return s >= 0 ? s / 2 : -((-s + 1) / 2);
}

ConfusionMatrix jump_confusion(const AlignmentSet& predicted, const GoldCorpus& gold, int max_jump) {
  check_coverage(predicted, gold);
  ConfusionMatrix cm(max_jump);
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const auto ref = locations(gold_for(gold, n).possible);
    const auto pred = locations(predicted[n]);
    auto loc = [](const std::map<int, std::vector<int>>& m, int j, int& out) {
      const auto it = m.find(j);
      if (it == m.end()) return false;
      out = median_position(it->second);
      return true;
    };
    int max_j = 0;
    if (!ref.empty()) max_j = std::max(max_j, ref.rbegin()->first);
    if (!pred.empty()) max_j = std::max(max_j, pred.rbegin()->first);
    for (int j = 2; j <= max_j; ++j) {
      int ref_prev = 0, pred_prev = 0, ref_cur = 0, pred_cur = 0;
      if (!loc(ref, j - 1, ref_prev) || !loc(pred, j - 1, pred_prev) || pred_prev != ref_prev) continue;
      if (!loc(ref, j, ref_cur) || !loc(pred, j, pred_cur)) continue;
      const auto r = static_cast<std::size_t>(jump_bucket(ref_cur - ref_prev, max_jump));
      const auto p = static_cast<std::size_t>(jump_bucket(pred_cur - pred_prev, max_jump));
      ++cm.at(r, p);
    }
  }
  return cm;
}

FrequencyBuckets FrequencyBuckets::from_corpus(std::span<const SentencePair> training) {
  return from_counts(count_words(training, true), count_words(training, false));
}

FrequencyBuckets FrequencyBuckets::from_counts(const CountList& source_counts, const CountList& target_counts) {
  FrequencyBuckets b;
  // Stable sorts keep first-occurrence order among ties.
  CountList src = source_counts;
  std::stable_sort(src.begin(), src.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::size_t total = 0;
  for (const auto& [w, c] : src) total += c;
  std::size_t cum = 0;
  for (const auto& [w, c] : src) {
    b.seen_source_.insert(w);
    if (static_cast<double>(cum) < 0.9 * static_cast<double>(total)) b.frequent_source_.insert(w);
    cum += c;
  }
  CountList tgt = target_counts;
  std::stable_sort(tgt.begin(), tgt.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
  total = 0;
  for (const auto& [w, c] : tgt) total += c;
  cum = 0;
  for (const auto& [w, c] : tgt) {
    b.seen_target_.insert(w);
    if (static_cast<double>(cum + c) <= 0.01 * static_cast<double>(total)) b.rare_target_.insert(w);
    cum += c;
  }
  return b;
}

SourceGroup FrequencyBuckets::source_group(const std::string& word) const {
  if (frequent_source_.count(word)) return SourceGroup::Frequent;
  if (seen_source_.count(word)) return SourceGroup::Infrequent;
  return SourceGroup::Unseen;
}

TargetGroup FrequencyBuckets::target_group(const std::string& word) const {
  if (!seen_target_.count(word)) return TargetGroup::Unseen;
  return rare_target_.count(word) ? TargetGroup::Rare : TargetGroup::Other;
}

GarbageTable garbage_table(const AlignmentSet& predicted, const GoldCorpus& gold, std::span<const SentencePair> test,
                           const FrequencyBuckets& buckets) {
  check_coverage(predicted, gold);
  if (test.size() != predicted.size()) throw DataError("garbage_table: sentence count mismatch");
  GarbageTable table{};
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const GoldAlignment& g = gold_for(gold, n);
    for (const auto& l : predicted[n]) {
      if (g.possible.count(l)) continue;
      if (l.source < 1 || static_cast<std::size_t>(l.source) > test[n].source_length() || l.target < 1 ||
          static_cast<std::size_t>(l.target) > test[n].target_length()) {
        throw DataError("predicted link outside sentence " + std::to_string(n + 1));
      }
      const auto tg = buckets.target_group(test[n].target_words[static_cast<std::size_t>(l.target - 1)]);
      if (tg == TargetGroup::Other) continue;
      const auto sg = buckets.source_group(test[n].source_words[static_cast<std::size_t>(l.source - 1)]);
      ++table[static_cast<std::size_t>(sg)][static_cast<std::size_t>(tg)];
    }
  }
  return table;
}

void write_garbage_table(std::ostream& out, const GarbageTable& table) {
  static const char* kRows[] = {"90%", "10%", "0%"};
  out << "source/target\t1%\t0%\n";
  for (std::size_t r = 0; r < 3; ++r) out << kRows[r] << '\t' << table[r][0] << '\t' << table[r][1] << '\n';
}

void emit_heatmap(std::ostream& out, const std::vector<std::vector<double>>& matrix,
                  const std::vector<std::string>& row_labels, const std::vector<std::string>& column_labels) {
  if (row_labels.size() != matrix.size()) throw ShapeError("heatmap: row label count mismatch");
  out << "ref/pred";
  for (const auto& c : column_labels) out << '\t' << c;
  out << '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    if (matrix[r].size() != column_labels.size()) throw ShapeError("heatmap: column label count mismatch");
    out << row_labels[r];
    for (double v : matrix[r]) out << '\t' << format_cell(v);
    out << '\n';
  }
}

void emit_heatmap(std::ostream& out, const ConfusionMatrix& cm) {
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < cm.size(); ++b) labels.push_back(bucket_label(b, cm.max_jump));
  std::vector<std::vector<double>> m(cm.size(), std::vector<double>(cm.size()));
  for (std::size_t r = 0; r < cm.size(); ++r)
    for (std::size_t c = 0; c < cm.size(); ++c) m[r][c] = static_cast<double>(cm.at(r, c));
  emit_heatmap(out, m, labels, labels);
}

void emit_heatmap(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  emit_heatmap(out, cm);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace neuralign
