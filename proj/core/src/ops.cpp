#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "neuralign/errors.hpp"
#include "neuralign/tensor.hpp"

namespace neuralign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Four partial sums so the compiler can keep several multiplies in flight.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    s0 += a[p] * b[p];
    s1 += a[p + 1] * b[p + 1];
    s2 += a[p + 2] * b[p + 2];
    s3 += a[p + 3] * b[p + 3];
  }
  for (; p < n; ++p) s0 += a[p] * b[p];
  return (s0 + s1) + (s2 + s3);
}

Graph& graph_of(Var v) {
  if (!v.valid()) throw Error("operation on an empty Var");
  return *v.graph();
}

void same_graph(Var a, Var b) {
  if (a.graph() != b.graph()) throw Error("operands belong to different graphs");
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw ShapeError(op + ": shapes [" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + "] and [" +
                   std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + "] do not conform");
}

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Elementwise unary op with derivative expressed through input and output.
template <typename F, typename D>
Var unary(Var x, F f, D derivative) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, x, o, derivative] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double* go = g.grad(o);
    const auto& in = g.value(x).values();
    const auto& out = g.value(o).values();
    for (std::size_t i = 0; i < in.size(); ++i) gx[i] += go[i] * derivative(in[i], out[i]);
  });
  return o;
}

}  // namespace

Var matmul(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows();
  const std::size_t k = A.cols();
  const std::size_t n = B.cols();
  if (B.rows() != k) shape_error("matmul", A, B);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * B[p * n + j];
    }
  }
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, a, b, o, m, k, n] {
    const double* go = g.grad(o);
    const auto& A = g.value(a).values();
    const auto& B = g.value(b).values();
    if (double* ga = g.grad(a)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += go[i * n + j] * B[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (double* gb = g.grad(b)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * go[i * n + j];
        }
    }
  });
  return o;
}

Var matmul_nt(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows();
  const std::size_t k = A.cols();
  const std::size_t n = B.rows();
  if (B.cols() != k) shape_error("matmul_nt", A, B);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = A.values().data() + i * k;
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = dot(arow, B.values().data() + j * k, k);
  }
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, a, b, o, m, k, n] {
    const double* go = g.grad(o);
    const auto& A = g.value(a).values();
    const auto& B = g.value(b).values();
    double* ga = g.grad(a);
    double* gb = g.grad(b);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double gv = go[i * n + j];
        if (gv == 0.0) continue;
        if (ga != nullptr)
          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += gv * B[j * k + p];
        if (gb != nullptr)
          for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += gv * A[i * k + p];
      }
    }
  });
  return o;
}

Var linear(Var x, Var weight, Var bias) {
  const Tensor& W = weight.value();
  const Tensor& b = bias.value();
  if (b.size() != W.rows()) shape_error("linear(bias)", W, b);
  return add_row(matmul_nt(x, weight), bias);
}

Var linear(Var x, Var weight) { return matmul_nt(x, weight); }

Var add(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.size() != B.size() || A.cols() != B.cols()) shape_error("add", A, B);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] + B[i];
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, a, b, o] {
    const double* go = g.grad(o);
    const std::size_t n = g.value(o).size();
    if (double* ga = g.grad(a))
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
    if (double* gb = g.grad(b))
      for (std::size_t i = 0; i < n; ++i) gb[i] += go[i];
  });
  return o;
}

Var add_row(Var x, Var row) {
  same_graph(x, row);
  Graph& g = graph_of(x);
  const Tensor& X = x.value();
  const Tensor& R = row.value();
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  if (R.size() != n) shape_error("add_row", X, R);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = X[i * n + j] + R[j];
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, x, row, o, m, n] {
    const double* go = g.grad(o);
    if (double* gx = g.grad(x))
      for (std::size_t i = 0; i < m * n; ++i) gx[i] += go[i];
    if (double* gr = g.grad(row))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += go[i * n + j];
  });
  return o;
}

Var scale(Var x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var hadamard(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.size() != B.size()) shape_error("hadamard", A, B);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] * B[i];
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, a, b, o] {
    const double* go = g.grad(o);
    const auto& A = g.value(a).values();
    const auto& B = g.value(b).values();
    if (double* ga = g.grad(a))
      for (std::size_t i = 0; i < A.size(); ++i) ga[i] += go[i] * B[i];
    if (double* gb = g.grad(b))
      for (std::size_t i = 0; i < A.size(); ++i) gb[i] += go[i] * A[i];
  });
  return o;
}

Var htanh(Var x) {
  return unary(
      x, [](double v) { return std::clamp(v, -1.0, 1.0); },
      [](double in, double) { return (in > -1.0 && in < 1.0) ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Var sigmoid(Var x) {
  return unary(x, sigmoid_value, [](double, double out) { return out * (1.0 - out); });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  Graph& g = graph_of(parts[0]);
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    same_graph(parts[0], p);
    if (p.rows() != m) shape_error("concat_cols", parts[0].value(), p.value());
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out({m, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = parts[k].value();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + offset + j] = P[i * widths[k] + j];
    offset += widths[k];
  }
  Var o = g.record(std::move(out));
  std::vector<Var> inputs(parts.begin(), parts.end());
  g.set_backward(o, [&g, inputs, widths, o, m, total] {
    const double* go = g.grad(o);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (double* gp = g.grad(inputs[k])) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) gp[i * widths[k] + j] += go[i * total + offset + j];
      }
      offset += widths[k];
    }
  });
  return o;
}

Var stack_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("stack_rows of nothing");
  Graph& g = graph_of(parts[0]);
  const std::size_t n = parts[0].cols();
  std::size_t total_rows = 0;
  for (const auto& p : parts) {
    same_graph(parts[0], p);
    if (p.cols() != n) shape_error("stack_rows", parts[0].value(), p.value());
    total_rows += p.rows();
  }
  Tensor out({total_rows, n});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto& v = p.value().values();
    std::copy(v.begin(), v.end(), out.values().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
  }
  Var o = g.record(std::move(out));
  std::vector<Var> inputs(parts.begin(), parts.end());
  g.set_backward(o, [&g, inputs, o] {
    const double* go = g.grad(o);
    std::size_t offset = 0;
    for (const auto& p : inputs) {
      const std::size_t size = g.value(p).size();
      if (double* gp = g.grad(p))
        for (std::size_t i = 0; i < size; ++i) gp[i] += go[offset + i];
      offset += size;
    }
  });
  return o;
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  Graph& g = graph_of(x);
  const Tensor& X = x.value();
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  if (begin + count > n) throw ShapeError("slice_cols out of range");
  Tensor out({m, count});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = X[i * n + begin + j];
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, x, o, m, n, begin, count] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double* go = g.grad(o);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) gx[i * n + begin + j] += go[i * count + j];
  });
  return o;
}

Var select_rows(Var table, std::span<const int> ids) {
  Graph& g = graph_of(table);
  const Tensor& T = table.value();
  const std::size_t rows = T.rows();
  const std::size_t n = T.cols();
  Tensor out({ids.size(), n});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= rows) {
      throw ShapeError("select_rows: id " + std::to_string(ids[r]) + " out of range " + std::to_string(rows));
    }
    std::copy_n(T.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(ids[r]) * n), n,
                out.values().begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  Var o = g.record(std::move(out));
  std::vector<int> index(ids.begin(), ids.end());
  g.set_backward(o, [&g, table, o, index, n] {
    double* gt = g.grad(table);
    if (gt == nullptr) return;
    const double* go = g.grad(o);
    for (std::size_t r = 0; r < index.size(); ++r) {
      double* dst = gt + static_cast<std::size_t>(index[r]) * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += go[r * n + j];
    }
  });
  return o;
}

Var select_cols(Var x, std::span<const int> ids) {
  Graph& g = graph_of(x);
  const Tensor& X = x.value();
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  const std::size_t k = ids.size();
  Tensor out({m, k});
  for (std::size_t c = 0; c < k; ++c) {
    if (ids[c] < 0 || static_cast<std::size_t>(ids[c]) >= n) throw ShapeError("select_cols: id out of range");
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] = X[i * n + static_cast<std::size_t>(ids[c])];
  Var o = g.record(std::move(out));
  std::vector<int> index(ids.begin(), ids.end());
  g.set_backward(o, [&g, x, o, index, m, n] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double* go = g.grad(o);
    const std::size_t k = index.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < k; ++c) gx[i * n + static_cast<std::size_t>(index[c])] += go[i * k + c];
  });
  return o;
}

Var log_softmax(Var logits, std::span<const int> support) {
  Graph& g = graph_of(logits);
  const Tensor& X = logits.value();
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  std::vector<int> cols;
  if (support.empty()) {
    if (n == 0) throw ShapeError("log_softmax over an empty support");
    cols.resize(n);
    for (std::size_t j = 0; j < n; ++j) cols[j] = static_cast<int>(j);
  } else {
    cols.assign(support.begin(), support.end());
    for (const int c : cols) {
      if (c < 0 || static_cast<std::size_t>(c) >= n) throw ShapeError("log_softmax: support id out of range");
    }
  }
  Tensor out(X.shape(), kNegInf);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = kNegInf;
    for (const int c : cols) mx = std::max(mx, X[i * n + static_cast<std::size_t>(c)]);
    double acc = 0.0;
    for (const int c : cols) acc += std::exp(X[i * n + static_cast<std::size_t>(c)] - mx);
    const double lse = mx + std::log(acc);
    for (const int c : cols) out[i * n + static_cast<std::size_t>(c)] = X[i * n + static_cast<std::size_t>(c)] - lse;
  }
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, logits, o, cols, m, n] {
    double* gx = g.grad(logits);
    if (gx == nullptr) return;
    const double* go = g.grad(o);
    const auto& Y = g.value(o).values();
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (const int c : cols) total += go[i * n + static_cast<std::size_t>(c)];
      for (const int c : cols) {
        const std::size_t idx = i * n + static_cast<std::size_t>(c);
        gx[idx] += go[idx] - std::exp(Y[idx]) * total;
      }
    }
  });
  return o;
}

Var conv_combine(Var ctx, Var filter) {
  same_graph(ctx, filter);
  Graph& g = graph_of(ctx);
  const Tensor& X = ctx.value();
  const Tensor& F = filter.value();
  const std::size_t width = F.rows();
  if (F.cols() != width || width % 2 == 0) throw ShapeError("conv_combine: filter must be (2h+1) x (2h+1)");
  if (X.rows() != width) shape_error("conv_combine", X, F);
  const std::size_t d = X.cols();
  if (d <= width - 1) throw ShapeError("conv_combine: embedding width must exceed 2h");
  const std::size_t len = d - (width - 1);
  Tensor out({1, len});
  for (std::size_t k = 0; k < len; ++k) {
    double acc = 0.0;
    for (std::size_t r = 0; r < width; ++r)
      for (std::size_t c = 0; c < width; ++c) acc += F[r * width + c] * X[r * d + k + c];
    out[k] = acc;
  }
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, ctx, filter, o, width, d, len] {
    const double* go = g.grad(o);
    const auto& X = g.value(ctx).values();
    const auto& F = g.value(filter).values();
    double* gx = g.grad(ctx);
    double* gf = g.grad(filter);
    for (std::size_t k = 0; k < len; ++k) {
      const double gv = go[k];
      for (std::size_t r = 0; r < width; ++r)
        for (std::size_t c = 0; c < width; ++c) {
          if (gf != nullptr) gf[r * width + c] += gv * X[r * d + k + c];
          if (gx != nullptr) gx[r * d + k + c] += gv * F[r * width + c];
        }
    }
  });
  return o;
}

Var dropout(Var x, double rate, bool training, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  Graph& g = graph_of(x);
  const Tensor& X = x.value();
  std::bernoulli_distribution keep(1.0 - rate);
  const double factor = 1.0 / (1.0 - rate);
  std::vector<double> mask(X.size());
  for (auto& v : mask) v = keep(rng) ? factor : 0.0;
  Tensor out(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = X[i] * mask[i];
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, x, o, mask = std::move(mask)] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double* go = g.grad(o);
    for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += go[i] * mask[i];
  });
  return o;
}

Var dropout(Var x, double rate, bool training, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return dropout(x, rate, training, rng);
}

Var weighted_sum(Var x, const Tensor& weights) {
  Graph& g = graph_of(x);
  const Tensor& X = x.value();
  if (weights.size() != X.size()) shape_error("weighted_sum", X, weights);
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (weights[i] != 0.0) acc += weights[i] * X[i];
  }
  Var o = g.record(Tensor({1, 1}, acc));
  g.set_backward(o, [&g, x, o, w = weights.values()] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double go = g.grad(o)[0];
    for (std::size_t i = 0; i < w.size(); ++i) gx[i] += go * w[i];
  });
  return o;
}

Var sum(Var x) {
  Graph& g = graph_of(x);
  const auto& v = x.value().values();
  double acc = 0.0;
  for (const double e : v) acc += e;
  Var o = g.record(Tensor({1, 1}, acc));
  g.set_backward(o, [&g, x, o] {
    double* gx = g.grad(x);
    if (gx == nullptr) return;
    const double go = g.grad(o)[0];
    const std::size_t n = g.value(x).size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += go;
  });
  return o;
}

Var add_scalars(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("add_scalars of nothing");
  Graph& g = graph_of(scalars[0]);
  double acc = 0.0;
  for (const auto& s : scalars) {
    same_graph(scalars[0], s);
    acc += s.scalar();
  }
  Var o = g.record(Tensor({1, 1}, acc));
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  g.set_backward(o, [&g, inputs, o] {
    const double go = g.grad(o)[0];
    for (const auto& s : inputs)
      if (double* gs = g.grad(s)) gs[0] += go;
  });
  return o;
}

Var lstm_cell(Var inputs, std::size_t row, Var state, Var weight, Var bias) {
  same_graph(inputs, state);
  same_graph(inputs, weight);
  same_graph(inputs, bias);
  Graph& g = graph_of(inputs);
  const Tensor& X = inputs.value();
  const Tensor& S = state.value();
  const Tensor& W = weight.value();
  const Tensor& B = bias.value();
  const std::size_t d = X.cols();
  const std::size_t u = S.size() / 2;
  if (row >= X.rows() || S.size() != 2 * u || W.rows() != 4 * u || W.cols() != d + u || B.size() != 4 * u) {
    throw ShapeError("lstm_cell: inconsistent shapes");
  }
  const double* x = X.values().data() + row * d;
  const double* h = S.values().data();
  const double* c = S.values().data() + u;
  // gates: [input | forget | output | candidate], post-activation
  std::vector<double> gates(4 * u);
  for (std::size_t r = 0; r < 4 * u; ++r) {
    const double* w = W.values().data() + r * (d + u);
    double acc = B[r];
    for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
    for (std::size_t k = 0; k < u; ++k) acc += w[d + k] * h[k];
    gates[r] = r < 3 * u ? sigmoid_value(acc) : std::tanh(acc);
  }
  Tensor out({1, 2 * u});
  std::vector<double> cell_tanh(u);
  for (std::size_t k = 0; k < u; ++k) {
    const double cn = gates[u + k] * c[k] + gates[k] * gates[3 * u + k];
    cell_tanh[k] = std::tanh(cn);
    out[k] = gates[2 * u + k] * cell_tanh[k];
    out[u + k] = cn;
  }
  Var o = g.record(std::move(out));
  g.set_backward(o, [&g, inputs, row, state, weight, bias, o, d, u, gates = std::move(gates),
                     cell_tanh = std::move(cell_tanh)] {
    const double* go = g.grad(o);
    const auto& X = g.value(inputs).values();
    const auto& S = g.value(state).values();
    const auto& W = g.value(weight).values();
    const double* x = X.data() + row * d;
    const double* c = S.data() + u;
    std::vector<double> dz(4 * u);
    std::vector<double> dc_prev(u);
    for (std::size_t k = 0; k < u; ++k) {
      const double i_g = gates[k];
      const double f_g = gates[u + k];
      const double o_g = gates[2 * u + k];
      const double c_g = gates[3 * u + k];
      const double dh = go[k];
      const double dcell = go[u + k] + dh * o_g * (1.0 - cell_tanh[k] * cell_tanh[k]);
      dz[k] = dcell * c_g * i_g * (1.0 - i_g);
      dz[u + k] = dcell * c[k] * f_g * (1.0 - f_g);
      dz[2 * u + k] = dh * cell_tanh[k] * o_g * (1.0 - o_g);
      dz[3 * u + k] = dcell * i_g * (1.0 - c_g * c_g);
      dc_prev[k] = dcell * f_g;
    }
    double* gx = g.grad(inputs);
    double* gs = g.grad(state);
    double* gw = g.grad(weight);
    double* gb = g.grad(bias);
    const double* h = S.data();
    for (std::size_t r = 0; r < 4 * u; ++r) {
      const double dzr = dz[r];
      if (gb != nullptr) gb[r] += dzr;
      if (dzr == 0.0) continue;
      const double* w = W.data() + r * (d + u);
      if (gw != nullptr) {
        double* gwr = gw + r * (d + u);
        for (std::size_t k = 0; k < d; ++k) gwr[k] += dzr * x[k];
        for (std::size_t k = 0; k < u; ++k) gwr[d + k] += dzr * h[k];
      }
      if (gx != nullptr)
        for (std::size_t k = 0; k < d; ++k) gx[row * d + k] += dzr * w[k];
      if (gs != nullptr)
        for (std::size_t k = 0; k < u; ++k) gs[k] += dzr * w[d + k];
    }
    if (gs != nullptr)
      for (std::size_t k = 0; k < u; ++k) gs[u + k] += dc_prev[k];
  });
  return o;
}

}  // namespace neuralign
