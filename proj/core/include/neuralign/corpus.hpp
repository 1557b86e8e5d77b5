#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neuralign/links.hpp"

namespace neuralign {

inline constexpr int kUnkId = 0;
inline constexpr int kNullId = 1;
inline constexpr std::size_t kDefaultMaxLength = 50;
inline constexpr std::size_t kDefaultVocabularyCap = 50000;
inline constexpr std::size_t kDefaultMaxWordChars = 30;

enum class Side { Source, Target };

// Word <-> id map with training frequencies. Ids 0 and 1 are reserved for UNK
// and NULL; they never match a corpus surface form, so a literal "<unk>" token
// in the data is an ordinary word.
class Vocabulary {
 public:
  Vocabulary();

  std::size_t size() const noexcept { return words_.size(); }

  // Id of `word`, or kUnkId when it is not in the vocabulary.
  int id(const std::string& word) const;
  bool contains(const std::string& word) const;
  const std::string& word(int id) const;
  std::int64_t count(int id) const;

  // Appends a new entry; throws if the word is already present.
  int add(const std::string& word, std::int64_t count);
  void set_count(int id, std::int64_t count);

  std::vector<int> encode(std::span<const std::string> words) const;

  // `id<TAB>word<TAB>count` lines, one per entry including reserved ones.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
};

// Character inventory (UTF-8 code points). Id 0 is the unknown character,
// id 1 the dedicated symbol spelling the NULL word.
class CharVocabulary {
 public:
  static constexpr int kUnkChar = 0;
  static constexpr int kNullChar = 1;

  CharVocabulary();

  std::size_t size() const noexcept { return chars_.size(); }
  int id(const std::string& character) const;
  const std::string& character(int id) const { return chars_.at(static_cast<std::size_t>(id)); }
  int add(const std::string& character);

  // Character ids of `word`, truncated to `max_chars`.
  std::vector<int> encode(std::string_view word, std::size_t max_chars = kDefaultMaxWordChars) const;

  void write(std::ostream& out) const;
  static CharVocabulary read(std::istream& in);

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> chars_;
};

// One sentence pair. `source` is f_1..f_J (the aligned side), `target` is
// e_1..e_I (the side providing the hidden states).
struct SentencePair {
  std::size_t line = 0;  // 0-based line index in the unfiltered input
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;
  std::vector<int> source;
  std::vector<int> target;
  std::vector<std::vector<int>> source_chars;
  std::vector<std::vector<int>> target_chars;

  std::size_t source_length() const noexcept { return source_words.size(); }
  std::size_t target_length() const noexcept { return target_words.size(); }
};

struct LoadOptions {
  // Pairs where either side has max_length tokens or more are dropped; 0
  // disables the length filter.
  std::size_t max_length = kDefaultMaxLength;
  // Drop pairs with an empty side (with a warning). When false, empty pairs
  // are kept so that output lines stay parallel to the input.
  bool drop_empty = true;
};

std::vector<SentencePair> read_parallel(std::istream& source, std::istream& target,
                                        const LoadOptions& options = {});
std::vector<SentencePair> load_parallel(const std::filesystem::path& source_path,
                                        const std::filesystem::path& target_path,
                                        const LoadOptions& options = {});

// Re-applies the length filter to already loaded pairs.
std::vector<SentencePair> filter_pairs(std::span<const SentencePair> pairs, const LoadOptions& options);

// Keeps the `cap` most frequent words of one side (ties by first occurrence).
// Tokens of dropped words are credited to UNK's count.
Vocabulary build_vocab(std::span<const SentencePair> pairs, Side side,
                       std::size_t cap = kDefaultVocabularyCap);

CharVocabulary build_char_vocab(std::span<const SentencePair> pairs);

// Fills ids and character ids of every pair.
void encode_pairs(std::span<SentencePair> pairs, const Vocabulary& source_vocab,
                  const Vocabulary& target_vocab, const CharVocabulary& chars,
                  std::size_t max_word_chars = kDefaultMaxWordChars);

// A contiguous group of pairs, referenced by index into the corpus.
struct Batch {
  std::vector<std::size_t> pairs;
};

// Groups `count` pairs into batches of `size`. With a seed the pair order is
// shuffled first, deterministically.
std::vector<Batch> make_batches(std::size_t count, std::size_t size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Source-side softmax support for one batch: every source id of the batch,
// UNK, and the globally most frequent remaining ids up to `size` entries.
// Returned sorted ascending.
std::vector<int> batch_vocab(const Batch& batch, std::span<const SentencePair> pairs,
                             const Vocabulary& source_vocab, std::size_t size);

// Gold links of one sentence. `possible` always contains `sure`.
struct GoldAlignment {
  LinkSet sure;
  LinkSet possible;
};

// Keyed by 1-based sentence id.
using GoldCorpus = std::map<std::size_t, GoldAlignment>;

struct SentenceLengths {
  std::size_t source = 0;
  std::size_t target = 0;
};

// Reads `snt_id j i flag` lines (1-based, flag S or P). When `lengths` is
// given (indexed by sentence id - 1) positions are bounds-checked.
GoldCorpus read_gold(std::istream& in, std::span<const SentenceLengths> lengths = {});
GoldCorpus load_gold(const std::filesystem::path& path, std::span<const SentenceLengths> lengths = {});
void write_gold(std::ostream& out, const GoldCorpus& gold);

std::vector<SentenceLengths> sentence_lengths(std::span<const SentencePair> pairs);

}  // namespace neuralign
