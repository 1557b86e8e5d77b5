#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "neuralign/config.hpp"
#include "neuralign/corpus.hpp"
#include "neuralign/model.hpp"

namespace neuralign {

struct EpochStats {
  std::size_t epoch = 0;
  // Sum of sentence log-likelihoods before each update. Neural runs compute
  // it on the batch vocabulary support.
  double log_likelihood = 0.0;
  std::size_t skipped = 0;
  std::optional<double> dev_aer;
};

struct TrainResult {
  AlignerModel model;
  std::vector<EpochStats> epochs;
  // Epochs of an IBM-1 stage trained in-process for an HMM run.
  std::vector<EpochStats> ibm1_stage;
};

struct DevSet {
  std::vector<SentencePair> pairs;  // raw, encoded by the trainer
  GoldCorpus gold;
};

// Environment variable naming the directory for intermediate checkpoints.
inline constexpr const char* kCacheDirEnv = "NEURALIGN_CACHE_DIR";

// Trains on raw (unencoded) pairs. Writes `epoch<TAB>loglik[<TAB>dev_aer]`
// lines to `log` when given. HMM runs start from config.init_checkpoint or,
// without one, from an IBM-1 stage trained first.
TrainResult train(const TrainConfig& config, std::vector<SentencePair> corpus, const DevSet* dev = nullptr,
                  std::ostream* log = nullptr);

// Loads the corpus and dev data named by the config, trains, writes the log
// file and, when config.output is set, the checkpoint.
TrainResult train(const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace neuralign
