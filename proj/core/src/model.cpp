#include "neuralign/model.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "neuralign/decoder.hpp"
#include "neuralign/errors.hpp"
#include "parallel.hpp"

namespace neuralign {

namespace {

constexpr std::size_t kUncapped = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kNetworkSeedSalt = 0x6e6574776f726bULL;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

}  // namespace

AlignerModel AlignerModel::with_vocabularies(const TrainConfig& config, std::span<const SentencePair> training) {
  AlignerModel m;
  m.config = config;
  const bool neural = config.neural_translation();
  const bool char_output = config.translation == TranslationVariant::NNCharBoth;
  m.source_vocab = build_vocab(training, Side::Source, neural && !char_output ? config.vocab_cap : kUncapped);
  m.target_vocab = build_vocab(training, Side::Target, neural ? config.vocab_cap : kUncapped);
  m.chars = build_char_vocab(training);
  m.jump = JumpTable::uniform(config.max_jump, config.p0);
  return m;
}

void AlignerModel::create_translation_network(std::mt19937_64& rng) {
  if (!config.translation) return;
  translation = std::make_unique<NeuralTranslationModel>(*config.translation, config.dims, source_vocab.size(),
                                                         target_vocab.size(), chars.size(), params, rng);
}

void AlignerModel::create_jump_network(std::mt19937_64& rng) {
  if (config.jump == JumpVariant::Discrete) return;
  neural_jump = std::make_unique<NeuralJumpModel>(config.jump, config.jump_dims(), chars.size(), params, rng);
}

void AlignerModel::encode(std::span<SentencePair> pairs) const {
  encode_pairs(pairs, source_vocab, target_vocab, chars, config.max_word_chars);
}

OutputSupport AlignerModel::decode_support() const {
  if (translation && translation->char_output()) {
    return make_open_support(source_vocab, chars, {}, config.max_word_chars);
  }
  std::vector<int> ids;
  for (std::size_t id = 0; id < source_vocab.size(); ++id)
    if (static_cast<int>(id) != kNullId) ids.push_back(static_cast<int>(id));
  return make_support(ids);
}

std::unique_ptr<SupportScorer> AlignerModel::make_scorer() const {
  if (!translation) return nullptr;
  return std::make_unique<SupportScorer>(*translation, decode_support(), &chars, config.max_word_chars);
}

Matrix AlignerModel::emission(const SentencePair& pair, const SupportScorer* scorer) const {
  if (!translation) return emission_logprobs(table, pair, kDecodeFloor);
  if (!scorer) throw Error("a neural translation model needs a scorer");
  return scorer->emission_logprobs(pair);
}

std::vector<Matrix> AlignerModel::transitions(const SentencePair& pair) const {
  if (neural_jump) return neural_jump->transition_matrices(pair, jump.p0);
  return {transition_matrix(pair.target_length(), jump)};
}

std::vector<double> AlignerModel::initial(const SentencePair& pair) const {
  return initial_distribution(pair.target_length(), jump);
}

Posteriors AlignerModel::posteriors(const SentencePair& pair, const Matrix& emission) const {
  if (config.model == ModelFamily::IBM1) return ibm1_posteriors(emission);
  const auto t = transitions(pair);
  const auto init = initial(pair);
  return forward_backward(emission, t, init);
}

LinkSet AlignerModel::align(const SentencePair& pair, const SupportScorer* scorer) const {
  if (pair.source_length() == 0 || pair.target_length() == 0) return {};
  const Matrix em = emission(pair, scorer);
  if (config.model == ModelFamily::IBM1) return ibm1_decode(em);
  const auto t = transitions(pair);
  const auto init = initial(pair);
  try {
    return viterbi(em, t, init);
  } catch (const ZeroProbabilityError&) {
    warn("sentence " + std::to_string(pair.line + 1) + " has no finite-probability path; left unaligned");
    return {};
  }
}

AlignmentSet AlignerModel::align(std::span<const SentencePair> pairs, std::size_t threads) const {
  const auto scorer = make_scorer();
  AlignmentSet out(pairs.size());
  detail::parallel_chunks(pairs.size(), std::max<std::size_t>(1, threads),
                          [&](std::size_t, std::size_t begin, std::size_t end) {
                            for (std::size_t n = begin; n < end; ++n) out[n] = align(pairs[n], scorer.get());
                          });
  return out;
}

void AlignerModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "config.txt");
    config.write(out, false);
  }
  {
    auto out = open_out(dir / "manifest.txt");
    out << "format\tneuralign-checkpoint-1\n";
    write_tensor_manifest(out, params);
  }
  write_tensor_file(dir / "params.bin", params);
  {
    auto out = open_out(dir / "source.vocab");
    source_vocab.write(out);
  }
  {
    auto out = open_out(dir / "target.vocab");
    target_vocab.write(out);
  }
  {
    auto out = open_out(dir / "chars.vocab");
    chars.write(out);
  }
  {
    auto out = open_out(dir / "jump.txt");
    write_jump_table(out, jump);
  }
  {
    auto out = open_out(dir / "ttable.txt");
    table.write(out);
  }
}

AlignerModel AlignerModel::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("checkpoint directory " + dir.string() + " not found");
  AlignerModel m;
  {
    auto in = open_in(dir / "config.txt");
    m.config = TrainConfig::parse(in);
  }
  {
    auto in = open_in(dir / "source.vocab");
    m.source_vocab = Vocabulary::read(in);
  }
  {
    auto in = open_in(dir / "target.vocab");
    m.target_vocab = Vocabulary::read(in);
  }
  {
    auto in = open_in(dir / "chars.vocab");
    m.chars = CharVocabulary::read(in);
  }
  {
    auto in = open_in(dir / "jump.txt");
    m.jump = read_jump_table(in);
  }
  {
    auto in = open_in(dir / "ttable.txt");
    m.table = TranslationTable::read(in, m.target_vocab.size());
  }
  std::mt19937_64 rng(m.config.seed ^ kNetworkSeedSalt);
  m.create_translation_network(rng);
  if (m.config.model == ModelFamily::HMM) m.create_jump_network(rng);
  load_into(m.params, read_tensor_file(dir / "params.bin"));
  return m;
}

}  // namespace neuralign
