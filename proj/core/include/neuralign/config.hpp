#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "neuralign/neural_jump.hpp"
#include "neuralign/translation.hpp"

namespace neuralign {

enum class ModelFamily { IBM1, HMM };

std::string to_string(ModelFamily family);
ModelFamily parse_model_family(const std::string& name);

// Everything a training run needs. Parsed from `key = value` files; unknown
// keys are an error.
struct TrainConfig {
  ModelFamily model = ModelFamily::IBM1;
  // nullopt: count-based translation table.
  std::optional<TranslationVariant> translation;
  JumpVariant jump = JumpVariant::Discrete;

  std::size_t epochs = 10;
  // IBM-1 stage of an HMM run trained in-process; defaults to `epochs`.
  std::optional<std::size_t> ibm1_epochs;
  std::size_t batch_size = 100;
  double learning_rate = 0.001;
  // Batches between jump-table refreshes; 0 refreshes once per epoch.
  std::size_t jump_refresh = 0;
  std::uint64_t seed = 1;
  bool shuffle = true;
  std::size_t threads = 1;

  std::string src;
  std::string tgt;
  std::size_t max_len = 50;
  std::size_t vocab_cap = 50000;
  std::size_t batch_vocab_size = 5000;
  std::size_t max_word_chars = 30;

  TranslationDims dims;
  std::size_t jump_hidden = 80;
  int max_jump = 5;
  double p0 = 0.2;

  std::string output;
  std::string log;
  std::string dev_src;
  std::string dev_tgt;
  std::string dev_gold;
  std::string init_checkpoint;

  bool neural_translation() const noexcept { return translation.has_value(); }
  std::size_t stage_ibm1_epochs() const noexcept { return ibm1_epochs.value_or(epochs); }
  JumpDims jump_dims() const;

  // Throws ConfigError on inconsistent settings.
  void validate() const;

  static TrainConfig parse(std::istream& in);
  // Relative paths in the file are resolved against the file's directory.
  static TrainConfig load(const std::filesystem::path& path);
  // Writes every key. With include_paths = false the run-specific output,
  // log and init_checkpoint keys are left out.
  void write(std::ostream& out, bool include_paths = true) const;
};

}  // namespace neuralign
