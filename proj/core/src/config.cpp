#include "neuralign/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + value + "'");
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model", [](TrainConfig& c, const auto&, const auto& v) { c.model = parse_model_family(v); }},
      {"translation",
       [](TrainConfig& c, const auto&, const auto& v) {
         if (v == "discrete") {
           c.translation.reset();
         } else {
           c.translation = parse_translation_variant(v);
         }
       }},
      {"jump", [](TrainConfig& c, const auto&, const auto& v) { c.jump = parse_jump_variant(v); }},
      {"epochs", [](TrainConfig& c, const auto& k, const auto& v) { c.epochs = parse_unsigned<std::size_t>(k, v); }},
      {"ibm1_epochs",
       [](TrainConfig& c, const auto& k, const auto& v) { c.ibm1_epochs = parse_unsigned<std::size_t>(k, v); }},
      {"batch_size",
       [](TrainConfig& c, const auto& k, const auto& v) { c.batch_size = parse_unsigned<std::size_t>(k, v); }},
      {"learning_rate", [](TrainConfig& c, const auto& k, const auto& v) { c.learning_rate = parse_double(k, v); }},
      {"jump_refresh",
       [](TrainConfig& c, const auto& k, const auto& v) { c.jump_refresh = parse_unsigned<std::size_t>(k, v); }},
      {"seed", [](TrainConfig& c, const auto& k, const auto& v) { c.seed = parse_unsigned<std::uint64_t>(k, v); }},
      {"shuffle", [](TrainConfig& c, const auto& k, const auto& v) { c.shuffle = parse_bool(k, v); }},
      {"threads", [](TrainConfig& c, const auto& k, const auto& v) { c.threads = parse_unsigned<std::size_t>(k, v); }},
      {"src", [](TrainConfig& c, const auto&, const auto& v) { c.src = v; }},
      {"tgt", [](TrainConfig& c, const auto&, const auto& v) { c.tgt = v; }},
      {"max_len", [](TrainConfig& c, const auto& k, const auto& v) { c.max_len = parse_unsigned<std::size_t>(k, v); }},
      {"vocab_cap",
       [](TrainConfig& c, const auto& k, const auto& v) { c.vocab_cap = parse_unsigned<std::size_t>(k, v); }},
      {"batch_vocab_size",
       [](TrainConfig& c, const auto& k, const auto& v) { c.batch_vocab_size = parse_unsigned<std::size_t>(k, v); }},
      {"max_word_chars",
       [](TrainConfig& c, const auto& k, const auto& v) { c.max_word_chars = parse_unsigned<std::size_t>(k, v); }},
      {"embedding_dim",
       [](TrainConfig& c, const auto& k, const auto& v) { c.dims.embedding_dim = parse_unsigned<std::size_t>(k, v); }},
      {"hidden_dim",
       [](TrainConfig& c, const auto& k, const auto& v) { c.dims.hidden_dim = parse_unsigned<std::size_t>(k, v); }},
      {"context_width",
       [](TrainConfig& c, const auto& k, const auto& v) { c.dims.context_width = parse_unsigned<std::size_t>(k, v); }},
      {"char_dim",
       [](TrainConfig& c, const auto& k, const auto& v) { c.dims.char_dim = parse_unsigned<std::size_t>(k, v); }},
      {"char_hidden",
       [](TrainConfig& c, const auto& k, const auto& v) { c.dims.char_hidden = parse_unsigned<std::size_t>(k, v); }},
      {"dropout", [](TrainConfig& c, const auto& k, const auto& v) { c.dims.dropout = parse_double(k, v); }},
      {"jump_hidden",
       [](TrainConfig& c, const auto& k, const auto& v) { c.jump_hidden = parse_unsigned<std::size_t>(k, v); }},
      {"max_jump", [](TrainConfig& c, const auto& k, const auto& v) { c.max_jump = parse_int(k, v); }},
      {"p0", [](TrainConfig& c, const auto& k, const auto& v) { c.p0 = parse_double(k, v); }},
      {"output", [](TrainConfig& c, const auto&, const auto& v) { c.output = v; }},
      {"log", [](TrainConfig& c, const auto&, const auto& v) { c.log = v; }},
      {"dev_src", [](TrainConfig& c, const auto&, const auto& v) { c.dev_src = v; }},
      {"dev_tgt", [](TrainConfig& c, const auto&, const auto& v) { c.dev_tgt = v; }},
      {"dev_gold", [](TrainConfig& c, const auto&, const auto& v) { c.dev_gold = v; }},
      {"init_checkpoint", [](TrainConfig& c, const auto&, const auto& v) { c.init_checkpoint = v; }},
  };
  return table;
}

}  // namespace

std::string to_string(ModelFamily family) { return family == ModelFamily::IBM1 ? "IBM1" : "HMM"; }

ModelFamily parse_model_family(const std::string& name) {
  if (name == "IBM1") return ModelFamily::IBM1;
  if (name == "HMM") return ModelFamily::HMM;
  throw ConfigError("unknown model family '" + name + "' (expected IBM1 or HMM)");
}

JumpDims TrainConfig::jump_dims() const {
  JumpDims d;
  d.char_dim = dims.char_dim;
  d.char_hidden = dims.char_hidden;
  d.context_hidden = dims.char_hidden;
  d.mlp_hidden = jump_hidden;
  d.max_jump = max_jump;
  return d;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (max_jump < 1) throw ConfigError("max_jump must be at least 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0 must lie strictly between 0 and 1");
  if (!(dims.dropout >= 0.0 && dims.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (vocab_cap < 1) throw ConfigError("vocab_cap must be at least 1");
  if (batch_vocab_size < 1) throw ConfigError("batch_vocab_size must be at least 1");
  if (max_word_chars < 1) throw ConfigError("max_word_chars must be at least 1");
  if (dims.embedding_dim == 0 || dims.hidden_dim == 0 || dims.char_dim == 0 || dims.char_hidden == 0 ||
      jump_hidden == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (translation == TranslationVariant::CtxCnn && dims.embedding_dim <= 2 * dims.context_width) {
    throw ConfigError("embedding_dim must exceed 2 * context_width for CtxCnn");
  }
  if (model == ModelFamily::IBM1 && jump != JumpVariant::Discrete) {
    throw ConfigError("neural jump models need model = HMM");
  }
  if (jump != JumpVariant::Discrete && !translation) {
    throw ConfigError("neural jump models need a neural translation variant");
  }
  if (!dev_gold.empty() && (dev_src.empty() || dev_tgt.empty())) {
    throw ConfigError("dev_gold needs dev_src and dev_tgt");
  }
}

TrainConfig TrainConfig::parse(std::istream& in) {
  TrainConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(config, key, value);
  }
  return config;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  TrainConfig config = parse(in);
  const auto base = path.parent_path();
  for (std::string* p : {&config.src, &config.tgt, &config.output, &config.log, &config.dev_src, &config.dev_tgt,
                         &config.dev_gold, &config.init_checkpoint}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return config;
}

void TrainConfig::write(std::ostream& out, bool include_paths) const {
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  kv("model", to_string(model));
  kv("translation", translation ? to_string(*translation) : "discrete");
  kv("jump", to_string(jump));
  kv("epochs", std::to_string(epochs));
  if (ibm1_epochs) kv("ibm1_epochs", std::to_string(*ibm1_epochs));
  kv("batch_size", std::to_string(batch_size));
  kv("learning_rate", format_double(learning_rate));
  kv("jump_refresh", std::to_string(jump_refresh));
  kv("seed", std::to_string(seed));
  kv("shuffle", shuffle ? "true" : "false");
  kv("threads", std::to_string(threads));
  kv("max_len", std::to_string(max_len));
  kv("vocab_cap", std::to_string(vocab_cap));
  kv("batch_vocab_size", std::to_string(batch_vocab_size));
  kv("max_word_chars", std::to_string(max_word_chars));
  kv("embedding_dim", std::to_string(dims.embedding_dim));
  kv("hidden_dim", std::to_string(dims.hidden_dim));
  kv("context_width", std::to_string(dims.context_width));
  kv("char_dim", std::to_string(dims.char_dim));
  kv("char_hidden", std::to_string(dims.char_hidden));
  kv("dropout", format_double(dims.dropout));
  kv("jump_hidden", std::to_string(jump_hidden));
  kv("max_jump", std::to_string(max_jump));
  kv("p0", format_double(p0));
  if (!src.empty()) kv("src", src);
  if (!tgt.empty()) kv("tgt", tgt);
  if (!dev_src.empty()) kv("dev_src", dev_src);
  if (!dev_tgt.empty()) kv("dev_tgt", dev_tgt);
  if (!dev_gold.empty()) kv("dev_gold", dev_gold);
  if (include_paths) {
    if (!output.empty()) kv("output", output);
    if (!log.empty()) kv("log", log);
    if (!init_checkpoint.empty()) kv("init_checkpoint", init_checkpoint);
  }
}

}  // namespace neuralign
