#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "neuralign/corpus.hpp"
#include "neuralign/links.hpp"
#include "neuralign/matrix.hpp"

namespace neuralign::testing {

struct SyntheticCorpus {
  std::vector<SentencePair> pairs;  // raw
  GoldCorpus gold;                  // keyed by 1-based sentence id
};

SentencePair make_pair(const std::vector<std::string>& source, const std::vector<std::string>& target,
                       std::size_t line = 0);

// One-to-one dictionary corpus: target word e<k> always translates to source
// word f<k>. Words are drawn without replacement within a sentence. With
// `monotone` the source keeps the target order, otherwise it is shuffled.
// Gold has S = P = the generating links.
SyntheticCorpus dictionary_corpus(std::size_t types, std::size_t count, std::uint64_t seed, bool monotone,
                                  std::size_t min_length = 3, std::size_t max_length = 8);

// Zipf-distributed noisy bitext: content words with a mostly deterministic
// translation, a few source function words that stay unaligned, local swaps.
SyntheticCorpus zipf_corpus(std::size_t types, std::size_t count, std::uint64_t seed);

// Writes <stem>.src / <stem>.tgt (and <stem>.gold when gold is not empty).
void write_corpus(const std::filesystem::path& dir, const std::string& stem, const SyntheticCorpus& corpus);

// Random test inputs for the inference routines.
Matrix random_log_emission(std::size_t target_length, std::size_t source_length, std::mt19937_64& rng);
Matrix random_stochastic(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
std::vector<double> random_distribution(std::size_t size, std::mt19937_64& rng);

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace neuralign::testing
