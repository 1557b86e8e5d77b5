// neuralign command-line tool: train, align, score, symmetrize, analyze.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "neuralign/config.hpp"
#include "neuralign/corpus.hpp"
#include "neuralign/decoder.hpp"
#include "neuralign/errors.hpp"
#include "neuralign/eval.hpp"
#include "neuralign/model.hpp"
#include "neuralign/trainer.hpp"

namespace fs = std::filesystem;
using namespace neuralign;

namespace {

std::vector<SentencePair> load_test(const std::string& src, const std::string& tgt) {
  LoadOptions opts;
  opts.max_length = 0;
  opts.drop_empty = false;
  return load_parallel(src, tgt, opts);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

int run_train(const std::string& config_path) {
  const TrainConfig config = TrainConfig::load(config_path);
  train(config, &std::cout);
  return 0;
}

int run_align(const std::string& model_dir, const std::string& src, const std::string& tgt, const std::string& out,
              bool reverse) {
  const AlignerModel model = AlignerModel::load(model_dir);
  auto pairs = load_test(src, tgt);
  model.encode(pairs);
  AlignmentSet links = model.align(pairs, model.config.threads);
  if (reverse) links = reverse_links(links);
  write_pharaoh(out, links);
  return 0;
}

int run_score(const std::string& pred, const std::string& gold_path) {
  const AlignmentSet predicted = read_pharaoh(fs::path(pred));
  const GoldCorpus gold = load_gold(gold_path);
  write_aer_report(std::cout, aer(predicted, gold));
  return 0;
}

int run_symmetrize(const std::string& fwd, const std::string& rev, const std::string& out) {
  const AlignmentSet forward = read_pharaoh(fs::path(fwd));
  const AlignmentSet reverse = read_pharaoh(fs::path(rev));
  write_pharaoh(out, grow_diag_final(forward, reverse));
  return 0;
}

void write_recall(const fs::path& path, const std::map<std::string, RecallCounts>& counts) {
  auto out = open_out(path);
  out << "group\tnull_violated\tnonnull_missed\n";
  for (const auto& [group, c] : counts) out << group << '\t' << c.null_violated << '\t' << c.nonnull_missed << '\n';
}

struct AnalyzeArgs {
  std::string pred, gold, train_src, train_tgt, src, tgt, pos, outdir;
};

int run_analyze(const AnalyzeArgs& a) {
  const AlignmentSet predicted = read_pharaoh(fs::path(a.pred));
  const auto test = load_test(a.src, a.tgt);
  const auto lengths = sentence_lengths(test);
  const GoldCorpus gold = load_gold(a.gold, lengths);
  if (predicted.size() != test.size()) {
    throw DataError("prediction has " + std::to_string(predicted.size()) + " lines but the test corpus has " +
                    std::to_string(test.size()));
  }
  LoadOptions train_opts;
  train_opts.max_length = 0;
  const auto training = load_parallel(a.train_src, a.train_tgt, train_opts);

  fs::create_directories(a.outdir);
  const fs::path dir(a.outdir);
  {
    auto out = open_out(dir / "aer.txt");
    write_aer_report(out, aer(predicted, gold));
  }
  {
    const auto acc = accuracy_breakdown(predicted, gold, lengths);
    auto out = open_out(dir / "accuracy.tsv");
    out << "decision\tcorrect\tincorrect\n";
    out << "null\t" << acc.null_correct << '\t' << acc.null_incorrect << '\n';
    out << "link\t" << acc.link_correct << '\t' << acc.link_incorrect << '\n';
  }
  const Vocabulary target_vocab = build_vocab(training, Side::Target, std::numeric_limits<std::size_t>::max());
  write_recall(dir / "recall_vocab.tsv", recall_breakdown(predicted, gold, vocabulary_grouping(test, target_vocab)));
  if (!a.pos.empty()) {
    const auto tags = load_pos_tags(a.pos, test);
    write_recall(dir / "recall_pos.tsv", recall_breakdown(predicted, gold, pos_grouping(tags)));
  }
  emit_heatmap(dir / "jump_confusion.tsv", jump_confusion(predicted, gold));
  {
    const auto buckets = FrequencyBuckets::from_corpus(training);
    auto out = open_out(dir / "garbage.tsv");
    write_garbage_table(out, garbage_table(predicted, gold, test, buckets));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural and count-based word alignment"};
  app.require_subcommand(1, 1);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", config_path, "Config file")->required();

  std::string model_dir, src, tgt, out;
  bool reverse = false;
  auto* align_cmd = app.add_subcommand("align", "Align a corpus with a trained model");
  align_cmd->add_option("--model", model_dir, "Checkpoint directory")->required();
  align_cmd->add_option("--src", src, "Source text")->required();
  align_cmd->add_option("--tgt", tgt, "Target text")->required();
  align_cmd->add_option("--out", out, "Output Pharaoh file")->required();
  align_cmd->add_flag("--reverse", reverse, "Write links as i-j (for a model trained in the reverse direction)");

  std::string pred, gold;
  auto* score_cmd = app.add_subcommand("score", "Compute AER against gold links");
  score_cmd->add_option("--pred", pred, "Predicted Pharaoh file")->required();
  score_cmd->add_option("--gold", gold, "Gold file (snt j i S|P, 1-based)")->required();

  std::string fwd, rev, sym_out;
  auto* sym_cmd = app.add_subcommand("symmetrize", "Combine two directions with grow-diag-final");
  sym_cmd->add_option("--fwd", fwd, "Forward Pharaoh file")->required();
  sym_cmd->add_option("--rev", rev, "Reverse Pharaoh file, in forward orientation")->required();
  sym_cmd->add_option("--out", sym_out, "Output Pharaoh file")->required();

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Error analysis reports");
  an_cmd->add_option("--pred", an.pred, "Predicted Pharaoh file")->required();
  an_cmd->add_option("--gold", an.gold, "Gold file")->required();
  an_cmd->add_option("--train-src", an.train_src, "Training source text")->required();
  an_cmd->add_option("--train-tgt", an.train_tgt, "Training target text")->required();
  an_cmd->add_option("--src", an.src, "Test source text")->required();
  an_cmd->add_option("--tgt", an.tgt, "Test target text")->required();
  an_cmd->add_option("--pos", an.pos, "UPOS tags parallel to the test target text");
  an_cmd->add_option("--outdir", an.outdir, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return run_train(config_path);
    if (*align_cmd) return run_align(model_dir, src, tgt, out, reverse);
    if (*score_cmd) return run_score(pred, gold);
    if (*sym_cmd) return run_symmetrize(fwd, rev, sym_out);
    if (*an_cmd) return run_analyze(an);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
