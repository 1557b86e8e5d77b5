#include "synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace neuralign::testing {

SentencePair make_pair(const std::vector<std::string>& source, const std::vector<std::string>& target,
                       std::size_t line) {
  SentencePair p;
  p.line = line;
  p.source_words = source;
  p.target_words = target;
  return p;
}

SyntheticCorpus dictionary_corpus(std::size_t types, std::size_t count, std::uint64_t seed, bool monotone,
                                  std::size_t min_length, std::size_t max_length) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(min_length, std::min(max_length, types));
  std::vector<std::size_t> vocab(types);
  std::iota(vocab.begin(), vocab.end(), 0);
  SyntheticCorpus c;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t I = length(rng);
    std::shuffle(vocab.begin(), vocab.end(), rng);
    std::vector<std::size_t> order(I);
    std::iota(order.begin(), order.end(), 0);
    if (!monotone) std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> target, source;
    GoldAlignment gold;
    for (std::size_t i = 0; i < I; ++i) target.push_back("e" + std::to_string(vocab[i]));
    for (std::size_t j = 0; j < I; ++j) {
      source.push_back("f" + std::to_string(vocab[order[j]]));
      const Link link{static_cast<int>(j + 1), static_cast<int>(order[j] + 1)};
      gold.sure.insert(link);
      gold.possible.insert(link);
    }
    c.pairs.push_back(make_pair(source, target, n));
    c.gold[n + 1] = std::move(gold);
  }
  return c;
}

SyntheticCorpus zipf_corpus(std::size_t types, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(types);
  for (std::size_t k = 0; k < types; ++k) weights[k] = 1.0 / static_cast<double>(k + 1);
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(4, 12);
  std::uniform_int_distribution<int> function_word(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SyntheticCorpus c;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t I = length(rng);
    std::vector<std::string> target;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < I; ++i) {
      ids.push_back(word(rng));
      target.push_back("e" + std::to_string(ids.back()));
    }
    // source tokens with their generating target position (0 = none)
    std::vector<std::pair<std::string, int>> source;
    for (std::size_t i = 0; i < I; ++i) {
      if (u(rng) < 0.15) source.emplace_back("x" + std::to_string(function_word(rng)), 0);
      const std::size_t k = ids[i];
      const std::string surface = u(rng) < 0.85 ? "f" + std::to_string(k) : "g" + std::to_string(k % 97);
      if (u(rng) < 0.05) continue;  // dropped translation: target word unaligned
      source.emplace_back(surface, static_cast<int>(i + 1));
    }
    for (std::size_t j = 0; j + 1 < source.size(); ++j)
      if (u(rng) < 0.2) std::swap(source[j], source[j + 1]), ++j;
    if (source.empty()) source.emplace_back("x0", 0);
    std::vector<std::string> words;
    GoldAlignment gold;
    for (std::size_t j = 0; j < source.size(); ++j) {
      words.push_back(source[j].first);
      if (source[j].second > 0) {
        const Link link{static_cast<int>(j + 1), source[j].second};
        gold.sure.insert(link);
        gold.possible.insert(link);
      }
    }
    c.pairs.push_back(make_pair(words, target, n));
    c.gold[n + 1] = std::move(gold);
  }
  return c;
}

void write_corpus(const std::filesystem::path& dir, const std::string& stem, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  std::ofstream src(dir / (stem + ".src")), tgt(dir / (stem + ".tgt"));
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (std::size_t k = 0; k < words.size(); ++k) s += (k ? " " : "") + words[k];
    return s;
  };
  for (const auto& p : corpus.pairs) {
    src << join(p.source_words) << '\n';
    tgt << join(p.target_words) << '\n';
  }
  if (!corpus.gold.empty()) {
    std::ofstream gold(dir / (stem + ".gold"));
    write_gold(gold, corpus.gold);
  }
}

Matrix random_log_emission(std::size_t target_length, std::size_t source_length, std::mt19937_64& rng) {
  Matrix m(target_length + 1, source_length);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

Matrix random_stochastic(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto d = random_distribution(cols, rng);
    std::copy(d.begin(), d.end(), m.row(r).begin());
  }
  return m;
}

std::vector<double> random_distribution(std::size_t size, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> d(size);
  double z = 0.0;
  for (auto& v : d) z += (v = g(rng) + 1e-3);
  for (auto& v : d) v /= z;
  return d;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("neuralign-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace neuralign::testing
