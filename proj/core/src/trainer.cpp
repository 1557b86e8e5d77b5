#include "neuralign/trainer.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>

#include "neuralign/decoder.hpp"
#include "neuralign/errors.hpp"
#include "neuralign/eval.hpp"
#include "parallel.hpp"

namespace neuralign {

namespace {

constexpr std::uint64_t kDropoutSalt = 0x64726f706f7574ULL;
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kJumpInitSalt = 0x6a756d70ULL;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void log_epoch(std::ostream* log, const EpochStats& s) {
  if (!log) return;
  *log << s.epoch << '\t' << format_double(s.log_likelihood);
  if (s.dev_aer) *log << '\t' << format_double(*s.dev_aer);
  *log << '\n';
  log->flush();
}

struct EncodedDev {
  std::vector<SentencePair> pairs;
  const GoldCorpus* gold = nullptr;
};

std::optional<double> dev_aer(const AlignerModel& model, const EncodedDev& dev) {
  if (!dev.gold) return std::nullopt;
  const auto predicted = model.align(dev.pairs, model.config.threads);
  return aer(predicted, *dev.gold).aer;
}

// Posterior weights per emission cell, [(I+1) x J].
Tensor emission_weights(const Posteriors& post) {
  const std::size_t I = post.target_length;
  const std::size_t J = post.state.rows();
  Tensor w({I + 1, J});
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t s = 0; s < state_count(I); ++s) w.at(emission_row(s, I), j) += post.state(j, s);
  return w;
}

class NeuralTrainer {
 public:
  NeuralTrainer(AlignerModel& model, const std::vector<SentencePair>& pairs, std::mt19937_64& rng)
      : model_(model), pairs_(pairs), rng_(rng), pending_(model.config.max_jump) {}

  EpochStats run_epoch(std::size_t epoch) {
    const TrainConfig& cfg = model_.config;
    std::optional<std::uint64_t> shuffle;
    if (cfg.shuffle) shuffle = cfg.seed + epoch;
    const auto batches = make_batches(pairs_.size(), cfg.batch_size, shuffle);
    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& batch : batches) {
      step(batch, stats);
      if (cfg.model == ModelFamily::HMM && cfg.jump_refresh > 0 && ++since_refresh_ >= cfg.jump_refresh) refresh();
    }
    if (cfg.model == ModelFamily::HMM && cfg.jump_refresh == 0) refresh();
    return stats;
  }

 private:
  void refresh() {
    since_refresh_ = 0;
    if (pending_.empty()) return;
    model_.jump = jump_m_step_exact(pending_, model_.jump);
    pending_.clear();
  }

  void step(const Batch& batch, EpochStats& stats) {
    const TrainConfig& cfg = model_.config;
    const NeuralTranslationModel& tr = *model_.translation;
    const std::size_t size = std::min(cfg.batch_vocab_size, model_.source_vocab.size());
    const auto ids = batch_vocab(batch, pairs_, model_.source_vocab, size);
    const OutputSupport support = tr.char_output()
                                      ? make_char_support(ids, model_.source_vocab, model_.chars, cfg.max_word_chars)
                                      : make_support(ids);

    // E-step with the parameters frozen at batch start, no dropout.
    const std::size_t n = batch.pairs.size();
    std::vector<std::optional<Posteriors>> post(n);
    {
      const SupportScorer scorer(tr, support);
      const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
      std::vector<JumpCounts> counts(workers, JumpCounts(cfg.max_jump));
      detail::parallel_chunks(n, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const SentencePair& pair = pairs_[batch.pairs[k]];
          try {
            post[k] = model_.posteriors(pair, scorer.emission_logprobs(pair));
          } catch (const ZeroProbabilityError&) {
            continue;
          }
          if (cfg.model == ModelFamily::HMM) accumulate_jump_counts(*post[k], counts[w]);
        }
      });
      for (const auto& c : counts) pending_.merge(c);
    }
    std::size_t used = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (post[k]) {
        stats.log_likelihood += post[k]->log_likelihood;
        ++used;
      } else {
        ++stats.skipped;
      }
    }
    if (used == 0) return;

    // One gradient step on -Q, averaged over the batch. The output layer of
    // the batch support is built once; sentence graphs accumulate into copies
    // of it that are pushed back through the output graph at the end.
    model_.params.zero_grad();
    Graph output_graph;
    const OutputWeights root = tr.output(output_graph, support);
    Tensor shared_weight = root.weight.value();
    Tensor shared_bias;
    shared_weight.zero_grad();
    if (root.bias.valid()) {
      shared_bias = root.bias.value();
      shared_bias.zero_grad();
    }
    const double factor = -1.0 / static_cast<double>(used);
    for (std::size_t k = 0; k < n; ++k) {
      if (!post[k]) continue;
      const SentencePair& pair = pairs_[batch.pairs[k]];
      Graph graph;
      Var h = tr.hidden(graph, pair, true, rng_);
      OutputWeights ow;
      ow.weight = graph.parameter(shared_weight);
      if (root.bias.valid()) ow.bias = graph.parameter(shared_bias);
      Var emission = NeuralTranslationModel::emission(tr.logprobs(graph, h, ow), pair, support);
      std::vector<Var> terms = {weighted_sum(emission, emission_weights(*post[k]))};
      if (model_.neural_jump) {
        Var logits = model_.neural_jump->logits(graph, pair);
        if (logits.valid()) terms.push_back(model_.neural_jump->auxiliary(graph, logits, pair, *post[k], model_.jump.p0));
      }
      graph.backward(scale(add_scalars(terms), factor));
    }
    std::vector<Var> pushed = {weighted_sum(root.weight, Tensor(shared_weight.shape(), shared_weight.grad()))};
    if (root.bias.valid()) pushed.push_back(weighted_sum(root.bias, Tensor(shared_bias.shape(), shared_bias.grad())));
    output_graph.backward(add_scalars(pushed));
    adam_step(model_.params, cfg.learning_rate);
  }

  AlignerModel& model_;
  const std::vector<SentencePair>& pairs_;
  std::mt19937_64& rng_;
  JumpCounts pending_;
  std::size_t since_refresh_ = 0;
};

std::filesystem::path stage_checkpoint_path(const TrainConfig& config) {
  if (const char* cache = std::getenv(kCacheDirEnv); cache && *cache) {
    const std::string stem = config.output.empty() ? "run" : std::filesystem::path(config.output).filename().string();
    return std::filesystem::path(cache) / (stem + "-ibm1");
  }
  if (!config.output.empty()) return config.output + "-ibm1";
  return {};
}

void check_stage_compatible(const TrainConfig& hmm, const TrainConfig& stage) {
  auto mismatch = [](const std::string& what) {
    return ConfigError("init checkpoint does not match the HMM run: " + what);
  };
  if (stage.model != ModelFamily::IBM1) throw mismatch("it is not an IBM1 model");
  if (stage.translation != hmm.translation) throw mismatch("translation variant differs");
  if (hmm.translation) {
    const auto& a = stage.dims;
    const auto& b = hmm.dims;
    if (a.embedding_dim != b.embedding_dim || a.hidden_dim != b.hidden_dim || a.context_width != b.context_width ||
        a.char_dim != b.char_dim || a.char_hidden != b.char_hidden) {
      throw mismatch("network dimensions differ");
    }
    if (stage.vocab_cap != hmm.vocab_cap || stage.max_word_chars != hmm.max_word_chars) {
      throw mismatch("vocabulary settings differ");
    }
  }
}

TrainResult train_ibm1(const TrainConfig& config, std::vector<SentencePair> corpus, const DevSet* dev,
                       std::ostream* log) {
  TrainResult result;
  result.model = AlignerModel::with_vocabularies(config, corpus);
  AlignerModel& model = result.model;
  model.encode(corpus);
  EncodedDev encoded;
  if (dev) {
    encoded.pairs = dev->pairs;
    model.encode(encoded.pairs);
    encoded.gold = &dev->gold;
  }
  if (config.neural_translation()) {
    std::mt19937_64 init_rng(config.seed ^ kInitSalt);
    model.create_translation_network(init_rng);
    std::mt19937_64 rng(config.seed ^ kDropoutSalt);
    NeuralTrainer trainer(model, corpus, rng);
    for (std::size_t e = 1; e <= config.epochs; ++e) {
      EpochStats s = trainer.run_epoch(e);
      s.dev_aer = dev_aer(model, encoded);
      log_epoch(log, s);
      result.epochs.push_back(s);
    }
  } else {
    model.table = TranslationTable::uniform_cooccurrence(corpus, model.target_vocab.size());
    for (std::size_t e = 1; e <= config.epochs; ++e) {
      auto step = ibm1_em_step(corpus, model.table, config.threads);
      model.table = std::move(step.table);
      EpochStats s;
      s.epoch = e;
      s.log_likelihood = step.log_likelihood;
      s.skipped = step.skipped;
      s.dev_aer = dev_aer(model, encoded);
      log_epoch(log, s);
      result.epochs.push_back(s);
    }
  }
  return result;
}

TrainResult train_hmm(const TrainConfig& config, std::vector<SentencePair> corpus, const DevSet* dev,
                      std::ostream* log) {
  TrainResult result;
  if (!config.init_checkpoint.empty()) {
    result.model = AlignerModel::load(config.init_checkpoint);
    check_stage_compatible(config, result.model.config);
  } else {
    TrainConfig stage = config;
    stage.model = ModelFamily::IBM1;
    stage.jump = JumpVariant::Discrete;
    stage.epochs = config.stage_ibm1_epochs();
    if (log) *log << "# IBM1 stage\n";
    TrainResult s = train_ibm1(stage, corpus, dev, log);
    const auto path = stage_checkpoint_path(config);
    if (!path.empty()) s.model.save(path);
    result.model = std::move(s.model);
    result.ibm1_stage = std::move(s.epochs);
    if (log) *log << "# HMM\n";
  }
  AlignerModel& model = result.model;
  model.config = config;
  model.params.reset_optimizer();
  model.jump = JumpTable::uniform(config.max_jump, config.p0);
  std::mt19937_64 jump_rng(config.seed ^ kJumpInitSalt);
  model.create_jump_network(jump_rng);
  model.encode(corpus);
  EncodedDev encoded;
  if (dev) {
    encoded.pairs = dev->pairs;
    model.encode(encoded.pairs);
    encoded.gold = &dev->gold;
  }
  if (config.neural_translation()) {
    std::mt19937_64 rng(config.seed ^ kDropoutSalt);
    NeuralTrainer trainer(model, corpus, rng);
    for (std::size_t e = 1; e <= config.epochs; ++e) {
      EpochStats s = trainer.run_epoch(e);
      s.dev_aer = dev_aer(model, encoded);
      log_epoch(log, s);
      result.epochs.push_back(s);
    }
  } else {
    for (std::size_t e = 1; e <= config.epochs; ++e) {
      auto step = hmm_em_step(corpus, model.table, model.jump, config.threads);
      model.table = std::move(step.table);
      model.jump = step.jump;
      EpochStats s;
      s.epoch = e;
      s.log_likelihood = step.log_likelihood;
      s.skipped = step.skipped;
      s.dev_aer = dev_aer(model, encoded);
      log_epoch(log, s);
      result.epochs.push_back(s);
    }
  }
  return result;
}

TrainResult train_family(const TrainConfig& config, std::vector<SentencePair> corpus, const DevSet* dev,
                         std::ostream* log) {
  if (config.model == ModelFamily::IBM1) return train_ibm1(config, std::move(corpus), dev, log);
  return train_hmm(config, std::move(corpus), dev, log);
}

}  // namespace

TrainResult train(const TrainConfig& config, std::vector<SentencePair> corpus, const DevSet* dev, std::ostream* log) {
  config.validate();
  if (corpus.empty()) throw DataError("training corpus is empty");
  if (log && config.neural_translation()) *log << "# loglik is computed on the batch vocabulary support\n";
  return train_family(config, std::move(corpus), dev, log);
}

TrainResult train(const TrainConfig& config, std::ostream* log) {
  config.validate();
  if (config.src.empty() || config.tgt.empty()) throw ConfigError("config needs src and tgt");
  LoadOptions opts;
  opts.max_length = config.max_len;
  auto corpus = load_parallel(config.src, config.tgt, opts);
  std::optional<DevSet> dev;
  if (!config.dev_gold.empty()) {
    dev.emplace();
    LoadOptions dev_opts;
    dev_opts.max_length = 0;
    dev_opts.drop_empty = false;
    dev->pairs = load_parallel(config.dev_src, config.dev_tgt, dev_opts);
    const auto lengths = sentence_lengths(dev->pairs);
    dev->gold = load_gold(config.dev_gold, lengths);
  }
  std::ofstream file;
  std::ostream* out = log;
  if (!config.log.empty()) {
    file.open(config.log, std::ios::binary);
    if (!file) throw DataError("cannot write log file " + config.log);
    out = &file;
  }
  TrainResult result = train(config, std::move(corpus), dev ? &*dev : nullptr, out);
  if (!config.output.empty()) result.model.save(config.output);
  return result;
}

}  // namespace neuralign
