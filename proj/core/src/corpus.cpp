#include "neuralign/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "neuralign/errors.hpp"
#include "neuralign/utf8.hpp"

namespace neuralign {

namespace {

constexpr const char* kUnkName = "<unk>";
constexpr const char* kNullName = "<null>";

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary() : words_{kUnkName, kNullName}, counts_{0, 0} {}

int Vocabulary::id(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& word) const { return index_.count(word) > 0; }

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw DataError("vocabulary id out of range: " + std::to_string(id));
  }
  return words_[static_cast<std::size_t>(id)];
}

std::int64_t Vocabulary::count(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= counts_.size()) {
    throw DataError("vocabulary id out of range: " + std::to_string(id));
  }
  return counts_[static_cast<std::size_t>(id)];
}

int Vocabulary::add(const std::string& word, std::int64_t count) {
  const int id = static_cast<int>(words_.size());
  if (!index_.emplace(word, id).second) throw DataError("duplicate vocabulary entry: " + word);
  words_.push_back(word);
  counts_.push_back(count);
  return id;
}

void Vocabulary::set_count(int id, std::int64_t count) { counts_.at(static_cast<std::size_t>(id)) = count; }

std::vector<int> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << i << '\t' << words_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    std::size_t id = 0;
    std::int64_t count = 0;
    if (fields.size() != 3 || !parse_number(fields[0], id) || !parse_number(fields[2], count)) {
      throw DataError("malformed vocabulary line " + std::to_string(line_no));
    }
    if (id < 2) {
      if (id >= vocab.size()) throw DataError("vocabulary ids must be dense");
      vocab.counts_[id] = count;
      continue;
    }
    if (id != vocab.size()) throw DataError("vocabulary ids must be dense (line " + std::to_string(line_no) + ")");
    vocab.add(fields[1], count);
  }
  return vocab;
}

// ------------------------------------------------------------ CharVocabulary

CharVocabulary::CharVocabulary() : chars_{"<unk-char>", "<null-char>"} {}

int CharVocabulary::id(const std::string& character) const {
  const auto it = index_.find(character);
  return it == index_.end() ? kUnkChar : it->second;
}

int CharVocabulary::add(const std::string& character) {
  const auto it = index_.find(character);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(chars_.size());
  index_.emplace(character, id);
  chars_.push_back(character);
  return id;
}

std::vector<int> CharVocabulary::encode(std::string_view word, std::size_t max_chars) const {
  std::vector<int> ids;
  for (const auto& c : utf8_chars(word)) {
    if (ids.size() >= max_chars) break;
    ids.push_back(id(c));
  }
  if (ids.empty()) ids.push_back(kUnkChar);
  return ids;
}

void CharVocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < chars_.size(); ++i) out << i << '\t' << chars_[i] << '\n';
}

CharVocabulary CharVocabulary::read(std::istream& in) {
  CharVocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    std::size_t id = 0;
    if (fields.size() != 2 || !parse_number(fields[0], id)) {
      throw DataError("malformed character vocabulary line " + std::to_string(line_no));
    }
    if (id < 2) continue;
    if (id != vocab.size() || vocab.index_.count(fields[1]) > 0) {
      throw DataError("character vocabulary ids must be dense and unique (line " + std::to_string(line_no) + ")");
    }
    vocab.add(fields[1]);
  }
  return vocab;
}

// ------------------------------------------------------------------ loading

std::vector<SentencePair> read_parallel(std::istream& source, std::istream& target,
                                        const LoadOptions& options) {
  std::vector<SentencePair> pairs;
  std::string src_line;
  std::string tgt_line;
  std::size_t line = 0;
  while (true) {
    const bool has_src = static_cast<bool>(std::getline(source, src_line));
    const bool has_tgt = static_cast<bool>(std::getline(target, tgt_line));
    if (!has_src && !has_tgt) break;
    if (has_src != has_tgt) {
      throw DataError("parallel files have different line counts (mismatch at line " +
                      std::to_string(line + 1) + ")");
    }
    SentencePair pair;
    pair.line = line++;
    pair.source_words = split_whitespace(src_line);
    pair.target_words = split_whitespace(tgt_line);
    if (pair.source_words.empty() || pair.target_words.empty()) {
      if (options.drop_empty) {
        warn("dropping pair at line " + std::to_string(pair.line + 1) + ": empty side");
        continue;
      }
      pairs.push_back(std::move(pair));
      continue;
    }
    if (options.max_length > 0 &&
        (pair.source_words.size() >= options.max_length || pair.target_words.size() >= options.max_length)) {
      continue;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<SentencePair> load_parallel(const std::filesystem::path& source_path,
                                        const std::filesystem::path& target_path,
                                        const LoadOptions& options) {
  std::ifstream source(source_path);
  if (!source) throw DataError("cannot open " + source_path.string());
  std::ifstream target(target_path);
  if (!target) throw DataError("cannot open " + target_path.string());
  return read_parallel(source, target, options);
}

std::vector<SentencePair> filter_pairs(std::span<const SentencePair> pairs, const LoadOptions& options) {
  std::vector<SentencePair> out;
  for (const auto& p : pairs) {
    if (options.drop_empty && (p.source_words.empty() || p.target_words.empty())) continue;
    if (options.max_length > 0 &&
        (p.source_words.size() >= options.max_length || p.target_words.size() >= options.max_length)) {
      continue;
    }
    out.push_back(p);
  }
  return out;
}

// --------------------------------------------------------------- vocabulary

Vocabulary build_vocab(std::span<const SentencePair> pairs, Side side, std::size_t cap) {
  if (cap < 1) throw ConfigError("vocabulary cap must be at least 1");
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::pair<std::string, std::int64_t>> counts;  // first-occurrence order
  std::int64_t total = 0;
  for (const auto& p : pairs) {
    const auto& words = side == Side::Source ? p.source_words : p.target_words;
    for (const auto& w : words) {
      ++total;
      const auto [it, inserted] = slot.emplace(w, counts.size());
      if (inserted) counts.emplace_back(w, 0);
      ++counts[it->second].second;
    }
  }
  std::stable_sort(counts.begin(), counts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  std::int64_t kept = 0;
  for (std::size_t k = 0; k < counts.size() && k < cap; ++k) {
    vocab.add(counts[k].first, counts[k].second);
    kept += counts[k].second;
  }
  vocab.set_count(kUnkId, total - kept);
  return vocab;
}

CharVocabulary build_char_vocab(std::span<const SentencePair> pairs) {
  CharVocabulary chars;
  for (const auto& p : pairs) {
    for (const auto* words : {&p.source_words, &p.target_words}) {
      for (const auto& w : *words) {
        for (const auto& c : utf8_chars(w)) chars.add(c);
      }
    }
  }
  return chars;
}

void encode_pairs(std::span<SentencePair> pairs, const Vocabulary& source_vocab,
                  const Vocabulary& target_vocab, const CharVocabulary& chars,
                  std::size_t max_word_chars) {
  for (auto& p : pairs) {
    p.source = source_vocab.encode(p.source_words);
    p.target = target_vocab.encode(p.target_words);
    p.source_chars.clear();
    p.target_chars.clear();
    for (const auto& w : p.source_words) p.source_chars.push_back(chars.encode(w, max_word_chars));
    for (const auto& w : p.target_words) p.target_chars.push_back(chars.encode(w, max_word_chars));
  }
}

// ------------------------------------------------------------------ batches

std::vector<Batch> make_batches(std::size_t count, std::size_t size, std::optional<std::uint64_t> shuffle_seed) {
  if (size < 1) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < count; start += size) {
    Batch b;
    const auto end = std::min(count, start + size);
    b.pairs.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<int> batch_vocab(const Batch& batch, std::span<const SentencePair> pairs,
                             const Vocabulary& source_vocab, std::size_t size) {
  std::set<int> ids{kUnkId};
  for (const auto index : batch.pairs) {
    for (const int id : pairs[index].source) ids.insert(id);
  }
  if (ids.size() > size) {
    throw ConfigError("batch vocabulary size " + std::to_string(size) + " is smaller than the " +
                      std::to_string(ids.size()) + " distinct source ids of the batch");
  }
  if (ids.size() < size) {
    std::vector<int> order(source_vocab.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return source_vocab.count(a) > source_vocab.count(b); });
    for (const int id : order) {
      if (ids.size() >= size) break;
      ids.insert(id);
    }
  }
  return {ids.begin(), ids.end()};
}

// --------------------------------------------------------------------- gold

GoldCorpus read_gold(std::istream& in, std::span<const SentenceLengths> lengths) {
  GoldCorpus gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    std::size_t sentence = 0;
    int j = 0;
    int i = 0;
    if (fields.size() != 4 || !parse_number(fields[0], sentence) || !parse_number(fields[1], j) ||
        !parse_number(fields[2], i) || (fields[3] != "S" && fields[3] != "P")) {
      throw DataError("malformed gold alignment at line " + std::to_string(line_no) + ": '" + line + "'");
    }
    if (sentence < 1 || j < 1 || i < 1) {
      throw DataError("gold alignment index out of range at line " + std::to_string(line_no));
    }
    if (!lengths.empty()) {
      if (sentence > lengths.size() || static_cast<std::size_t>(j) > lengths[sentence - 1].source ||
          static_cast<std::size_t>(i) > lengths[sentence - 1].target) {
        throw DataError("gold alignment index out of range at line " + std::to_string(line_no));
      }
    }
    auto& entry = gold[sentence];
    const Link link{j, i};
    if (fields[3] == "S") entry.sure.insert(link);
    entry.possible.insert(link);
  }
  return gold;
}

GoldCorpus load_gold(const std::filesystem::path& path, std::span<const SentenceLengths> lengths) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_gold(in, lengths);
}

void write_gold(std::ostream& out, const GoldCorpus& gold) {
  for (const auto& [sentence, entry] : gold) {
    for (const auto& link : entry.possible) {
      out << sentence << ' ' << link.source << ' ' << link.target << ' '
          << (entry.sure.count(link) > 0 ? 'S' : 'P') << '\n';
    }
  }
}

std::vector<SentenceLengths> sentence_lengths(std::span<const SentencePair> pairs) {
  std::vector<SentenceLengths> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.source_length(), p.target_length()});
  return out;
}

}  // namespace neuralign
