#include "neuralign/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "neuralign/errors.hpp"

namespace neuralign {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'N', 'A', 'L', 'G', 'T', 'N', 'S', '1'};

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k > 0) s += 'x';
    s += std::to_string(shape[k]);
  }
  return s;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated tensor file");
  return value;
}

}  // namespace

Tensor& ParameterStore::create(const std::string& name, std::vector<std::size_t> shape, std::mt19937_64& rng,
                               double scale) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& v : t.values()) v = dist(rng);
  return add(name, std::move(t));
}

Tensor& ParameterStore::add(const std::string& name, Tensor value) {
  Parameter p;
  p.first_moment = Tensor(value.shape());
  p.second_moment = Tensor(value.shape());
  p.value = std::move(value);
  p.value.enable_grad();
  const auto [it, inserted] = params_.emplace(name, std::move(p));
  if (!inserted) throw ConfigError("duplicate parameter name: " + name);
  return it->second.value;
}

Tensor& ParameterStore::get(const std::string& name) { return entry(name).value; }
const Tensor& ParameterStore::get(const std::string& name) const { return entry(name).value; }

Parameter& ParameterStore::entry(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParameterStore::entry(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, p] : params_) p.value.zero_grad();
}

GradientMap ParameterStore::gradients() const {
  GradientMap grads;
  for (const auto& [name, p] : params_) {
    Tensor g(p.value.shape());
    if (p.value.has_grad()) g.values() = p.value.grad();
    grads.emplace(name, std::move(g));
  }
  return grads;
}

void ParameterStore::reset_optimizer() {
  for (auto& [name, p] : params_) {
    p.first_moment = Tensor(p.value.shape());
    p.second_moment = Tensor(p.value.shape());
    p.step = 0;
  }
}

void adam_step(ParameterStore& store, const GradientMap& grads, double learning_rate, const AdamConfig& config) {
  for (const auto& [name, grad] : grads) {
    if (!store.contains(name)) throw ShapeError("gradient for unknown parameter " + name);
    if (store.get(name).shape() != grad.shape()) {
      throw ShapeError("gradient shape " + shape_string(grad.shape()) + " does not match parameter " + name + " (" +
                       shape_string(store.get(name).shape()) + ")");
    }
  }
  for (const auto& [name, grad] : grads) {
    Parameter& p = store.entry(name);
    ++p.step;
    const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(p.step));
    const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(p.step));
    auto& theta = p.value.values();
    auto& m = p.first_moment.values();
    auto& v = p.second_moment.values();
    const auto& g = grad.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

void adam_step(ParameterStore& store, double learning_rate, const AdamConfig& config) {
  adam_step(store, store.gradients(), learning_rate, config);
}

void write_tensor_file(const std::filesystem::path& path, const ParameterStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, store.size());
  for (const auto& [name, p] : store) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& shape = p.value.shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (const auto d : shape) put<std::uint64_t>(out, d);
    const auto& v = p.value.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::map<std::string, Tensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError(path.string() + " is not a tensor file");
  const auto count = get<std::uint64_t>(in);
  std::map<std::string, Tensor> tensors;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = get<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    Tensor tensor(shape);
    auto& v = tensor.values();
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DataError("truncated tensor file " + path.string());
    tensors.emplace(std::move(name), std::move(tensor));
  }
  return tensors;
}

void write_tensor_manifest(std::ostream& out, const ParameterStore& store) {
  for (const auto& [name, p] : store) out << name << '\t' << shape_string(p.value.shape()) << '\n';
}

void load_into(ParameterStore& store, const std::map<std::string, Tensor>& tensors) {
  if (tensors.size() != store.size()) {
    throw DataError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                    std::to_string(store.size()));
  }
  for (auto& [name, p] : store) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("checkpoint lacks tensor " + name);
    if (it->second.shape() != p.value.shape()) {
      throw DataError("checkpoint tensor " + name + " has shape " + shape_string(it->second.shape()) + ", expected " +
                      shape_string(p.value.shape()));
    }
    p.value.values() = it->second.values();
  }
}

}  // namespace neuralign
