#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "neuralign/config.hpp"
#include "neuralign/corpus.hpp"
#include "neuralign/discrete.hpp"
#include "neuralign/inference.hpp"
#include "neuralign/jump.hpp"
#include "neuralign/links.hpp"
#include "neuralign/neural_jump.hpp"
#include "neuralign/params.hpp"
#include "neuralign/translation.hpp"

namespace neuralign {

// Floor applied to unseen (e, f) pairs of the count-based table at decode
// time.
inline constexpr double kDecodeFloor = 1e-12;

// A complete aligner: configuration, vocabularies and either the count-based
// tables or the neural networks with their parameters.
class AlignerModel {
 public:
  TrainConfig config;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  CharVocabulary chars;
  ParameterStore params;
  std::unique_ptr<NeuralTranslationModel> translation;
  std::unique_ptr<NeuralJumpModel> neural_jump;
  TranslationTable table;
  JumpTable jump;

  AlignerModel() = default;
  AlignerModel(AlignerModel&&) = default;
  AlignerModel& operator=(AlignerModel&&) = default;

  // Builds vocabularies from the (raw) training pairs. Networks are not
  // created yet.
  static AlignerModel with_vocabularies(const TrainConfig& config, std::span<const SentencePair> training);

  // Creates the translation network and, for neural jump variants, the jump
  // network, with fresh random parameters.
  void create_translation_network(std::mt19937_64& rng);
  void create_jump_network(std::mt19937_64& rng);

  void encode(std::span<SentencePair> pairs) const;

  // Output support used when decoding: the whole source vocabulary, or the
  // open vocabulary for the character-level output layer.
  OutputSupport decode_support() const;
  std::unique_ptr<SupportScorer> make_scorer() const;

  // Emission log-probabilities [(I+1) x J]; `scorer` is required for neural
  // translation models.
  Matrix emission(const SentencePair& pair, const SupportScorer* scorer) const;
  // Transition matrices (one shared or J-1) and initial distribution.
  std::vector<Matrix> transitions(const SentencePair& pair) const;
  std::vector<double> initial(const SentencePair& pair) const;
  // Posteriors of one sentence given its emission matrix.
  Posteriors posteriors(const SentencePair& pair, const Matrix& emission) const;

  LinkSet align(const SentencePair& pair, const SupportScorer* scorer) const;
  AlignmentSet align(std::span<const SentencePair> pairs, std::size_t threads = 1) const;

  // Checkpoint directory: config.txt, manifest.txt, params.bin, the three
  // vocabularies, jump.txt and ttable.txt.
  void save(const std::filesystem::path& dir) const;
  static AlignerModel load(const std::filesystem::path& dir);
};

}  // namespace neuralign
