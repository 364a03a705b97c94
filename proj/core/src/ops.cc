#include "spvs/ops.h"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spvs/errors.h"

namespace spvs {
namespace {

using internal::MakeResult;
using internal::Node;
using GradIn = std::span<const std::span<double>>;

void Gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double beta, double* c) {
  // Concurrent callers each run single-threaded kernels.
  static const bool single_threaded = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)single_threaded;
  const int lda = static_cast<int>(trans_a ? m : k);
  const int ldb = static_cast<int>(trans_b ? k : n);
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), 1.0, a, lda, b, ldb, beta, c, static_cast<int>(n));
}

void RequireMatrix(const Tensor& x, const char* op) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + ShapeToString(x.shape()));
  }
}

void RequireRowwise(const Tensor& x, const char* op) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError(std::string(op) + " expects rank 1 or 2, got " +
                         ShapeToString(x.shape()));
  }
}

enum class Broadcast { kSame, kScalarRight, kScalarLeft };

Broadcast ResolveBroadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.numel() == 1) return Broadcast::kScalarRight;
  if (a.numel() == 1) return Broadcast::kScalarLeft;
  throw DimensionError(std::string(op) + ": incompatible shapes " + ShapeToString(a.shape()) +
                       " and " + ShapeToString(b.shape()));
}

template <typename Fwd, typename Da, typename Db>
Tensor Binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, Da da, Db db) {
  const Broadcast mode = ResolveBroadcast(a, b, op);
  const Shape shape = mode == Broadcast::kScalarLeft ? b.shape() : a.shape();
  const std::size_t n = NumElements(shape);
  auto av = a.data();
  auto bv = b.data();
  auto ai = [mode](std::size_t i) { return mode == Broadcast::kScalarLeft ? 0 : i; };
  auto bi = [mode](std::size_t i) { return mode == Broadcast::kScalarRight ? 0 : i; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[ai(i)], bv[bi(i)]);
  return MakeResult(op, shape, std::move(out), {a, b},
                    [mode, ai, bi, da, db](const Node& self, std::span<const double> g, GradIn gi) {
                      auto x = self.inputs[0]->value;
                      auto y = self.inputs[1]->value;
                      (void)mode;
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        const double xa = x[ai(i)];
                        const double yb = y[bi(i)];
                        if (!gi[0].empty()) gi[0][ai(i)] += g[i] * da(xa, yb);
                        if (!gi[1].empty()) gi[1][bi(i)] += g[i] * db(xa, yb);
                      }
                    });
}

template <typename Fwd, typename Deriv>
Tensor Unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return MakeResult(op, x.shape(), std::move(out), {x},
                    [deriv](const Node& self, std::span<const double> g, GradIn gi) {
                      auto in = self.inputs[0]->value;
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        gi[0][i] += g[i] * deriv(in[i], self.value[i]);
                      }
                    });
}

double SigmoidValue(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: incompatible shapes " + ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  Gemm(false, false, m, n, k, a.data().data(), b.data().data(), 0.0, out.data());
  return MakeResult("matmul", {m, n}, std::move(out), {a, b},
                    [m, n, k](const Node& self, std::span<const double> g, GradIn gi) {
                      const double* av = self.inputs[0]->value.data();
                      const double* bv = self.inputs[1]->value.data();
                      // dA = dC * B^T, dB = A^T * dC
                      if (!gi[0].empty()) Gemm(false, true, m, k, n, g.data(), bv, 1.0, gi[0].data());
                      if (!gi[1].empty()) Gemm(true, false, k, n, m, av, g.data(), 1.0, gi[1].data());
                    });
}

Tensor Transpose(const Tensor& a) {
  RequireMatrix(a, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  auto av = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return MakeResult("transpose", {n, m}, std::move(out), {a},
                    [m, n](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < n; ++j) gi[0][i * n + j] += g[j * m + i];
                    });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  return Binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  return Binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  return Binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor AddRowVector(const Tensor& x, const Tensor& v) {
  RequireRowwise(x, "add_row_vector");
  const std::size_t m = x.rows(), n = x.cols();
  if (v.numel() != n) {
    throw DimensionError("add_row_vector: vector of length " + std::to_string(v.numel()) +
                         " cannot broadcast over rows of " + ShapeToString(x.shape()));
  }
  auto xv = x.data();
  auto vv = v.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xv[i * n + j] + vv[j];
  return MakeResult("add_row_vector", x.shape(), std::move(out), {x, v},
                    [m, n](const Node&, std::span<const double> g, GradIn gi) {
                      if (!gi[0].empty())
                        for (std::size_t i = 0; i < m * n; ++i) gi[0][i] += g[i];
                      if (!gi[1].empty())
                        for (std::size_t i = 0; i < m; ++i)
                          for (std::size_t j = 0; j < n; ++j) gi[1][j] += g[i * n + j];
                    });
}

Tensor ScaleRows(const Tensor& x, const Tensor& s) {
  RequireRowwise(x, "scale_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (s.numel() != m) {
    throw DimensionError("scale_rows: " + std::to_string(s.numel()) + " scales for " +
                         ShapeToString(x.shape()));
  }
  auto xv = x.data();
  auto sv = s.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xv[i * n + j] * sv[i];
  return MakeResult("scale_rows", x.shape(), std::move(out), {x, s},
                    [m, n](const Node& self, std::span<const double> g, GradIn gi) {
                      auto xin = self.inputs[0]->value;
                      auto sin = self.inputs[1]->value;
                      for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                          if (!gi[0].empty()) gi[0][i * n + j] += g[i * n + j] * sin[i];
                          if (!gi[1].empty()) gi[1][i] += g[i * n + j] * xin[i * n + j];
                        }
                      }
                    });
}

Tensor Scale(const Tensor& x, double factor) {
  return Unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor AddScalar(const Tensor& x, double offset) {
  return Unary(
      "add_scalar", x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

Tensor Negate(const Tensor& x) {
  return Unary(
      "negate", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary("sigmoid", x, SigmoidValue, [](double, double y) { return y * (1.0 - y); });
}

Tensor Relu(const Tensor& x) {
  return Unary(
      "relu", x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor Gelu(const Tensor& x) {
  return Unary(
      "gelu", x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2)); },
      [](double v, double) {
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
      });
}

Tensor Exp(const Tensor& x) {
  return Unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor Log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0)) throw DomainError("log of non-positive value " + std::to_string(v));
  }
  return Unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor Sqrt(const Tensor& x) {
  for (double v : x.data()) {
    if (v < 0) throw DomainError("sqrt of negative value " + std::to_string(v));
  }
  return Unary(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0 ? 0.5 / y : 0.0; });
}

Tensor Square(const Tensor& x) {
  return Unary(
      "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor Clamp(const Tensor& x, double lo, double hi) {
  return Unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor Sum(const Tensor& x) {
  double s = 0;
  for (double v : x.data()) s += v;
  return MakeResult("sum", {}, {s}, {x}, [](const Node&, std::span<const double> g, GradIn gi) {
    for (double& d : gi[0]) d += g[0];
  });
}

Tensor Mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  double s = 0;
  for (double v : x.data()) s += v;
  return MakeResult("mean", {}, {s / n}, {x},
                    [n](const Node&, std::span<const double> g, GradIn gi) {
                      for (double& d : gi[0]) d += g[0] / n;
                    });
}

Tensor RowL2Norm(const Tensor& x) {
  RequireRowwise(x, "row_l2_norm");
  const std::size_t m = x.rows(), n = x.cols();
  auto xv = x.data();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += xv[i * n + j] * xv[i * n + j];
    out[i] = std::sqrt(s);
  }
  return MakeResult("row_l2_norm", {m}, std::move(out), {x},
                    [m, n](const Node& self, std::span<const double> g, GradIn gi) {
                      auto in = self.inputs[0]->value;
                      for (std::size_t i = 0; i < m; ++i) {
                        const double norm = self.value[i];
                        if (norm == 0) continue;
                        for (std::size_t j = 0; j < n; ++j)
                          gi[0][i * n + j] += g[i] * in[i * n + j] / norm;
                      }
                    });
}

Tensor L2NormalizeRows(const Tensor& x, std::vector<std::size_t>* zero_rows) {
  RequireRowwise(x, "l2_normalize_rows");
  const std::size_t m = x.rows(), n = x.cols();
  auto xv = x.data();
  std::vector<double> norms(m);
  std::vector<double> out(xv.begin(), xv.end());
  if (zero_rows) zero_rows->clear();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += xv[i * n + j] * xv[i * n + j];
    norms[i] = std::sqrt(s);
    if (norms[i] == 0) {
      if (zero_rows) zero_rows->push_back(i);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= norms[i];
  }
  return MakeResult(
      "l2_normalize_rows", x.shape(), std::move(out), {x},
      [m, n, norms](const Node& self, std::span<const double> g, GradIn gi) {
        for (std::size_t i = 0; i < m; ++i) {
          if (norms[i] == 0) {
            for (std::size_t j = 0; j < n; ++j) gi[0][i * n + j] += g[i * n + j];
            continue;
          }
          // d(x/|x|) = (g - y (y.g)) / |x|
          double dot = 0;
          for (std::size_t j = 0; j < n; ++j) dot += self.value[i * n + j] * g[i * n + j];
          for (std::size_t j = 0; j < n; ++j)
            gi[0][i * n + j] += (g[i * n + j] - self.value[i * n + j] * dot) / norms[i];
        }
      });
}

Tensor SoftmaxRows(const Tensor& x, std::span<const std::uint8_t> key_valid) {
  RequireRowwise(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (!key_valid.empty() && key_valid.size() != n) {
    throw DimensionError("softmax_rows: key mask of length " + std::to_string(key_valid.size()) +
                         " for " + std::to_string(n) + " columns");
  }
  std::vector<std::uint8_t> valid(key_valid.begin(), key_valid.end());
  auto ok = [&valid](std::size_t j) { return valid.empty() || valid[j] != 0; };
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) any = any || ok(j);
  if (!any) throw ContractError("softmax_rows: every key is masked");
  auto xv = x.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < n; ++j)
      if (ok(j)) mx = std::max(mx, xv[i * n + j]);
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!ok(j)) continue;
      out[i * n + j] = std::exp(xv[i * n + j] - mx);
      s += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= s;
  }
  return MakeResult("softmax_rows", x.shape(), std::move(out), {x},
                    [m, n](const Node& self, std::span<const double> g, GradIn gi) {
                      const auto& y = self.value;
                      for (std::size_t i = 0; i < m; ++i) {
                        double dot = 0;
                        for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * g[i * n + j];
                        for (std::size_t j = 0; j < n; ++j)
                          gi[0][i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
                      }
                    });
}

Tensor LayerNormRows(const Tensor& x, const Tensor& gain, const Tensor& bias, double epsilon) {
  RequireRowwise(x, "layer_norm_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (gain.numel() != n || bias.numel() != n) {
    throw DimensionError("layer_norm_rows: gain/bias of length " + std::to_string(gain.numel()) +
                         "/" + std::to_string(bias.numel()) + " for width " + std::to_string(n));
  }
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  std::vector<double> xhat(m * n), inv_std(m), out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0;
    for (std::size_t j = 0; j < n; ++j) mean += xv[i * n + j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t j = 0; j < n; ++j) var += (xv[i * n + j] - mean) * (xv[i * n + j] - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (xv[i * n + j] - mean) * inv_std[i];
      out[i * n + j] = xhat[i * n + j] * gv[j] + bv[j];
    }
  }
  return MakeResult(
      "layer_norm_rows", x.shape(), std::move(out), {x, gain, bias},
      [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          const Node& self, std::span<const double> g, GradIn gi) {
        auto gv = self.inputs[1]->value;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < m; ++i) {
          double sum_d = 0, sum_dx = 0;
          for (std::size_t j = 0; j < n; ++j) {
            const double d = g[i * n + j] * gv[j];
            sum_d += d;
            sum_dx += d * xhat[i * n + j];
          }
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = i * n + j;
            if (!gi[0].empty()) {
              const double d = g[idx] * gv[j];
              gi[0][idx] += inv_std[i] * (d - inv_n * sum_d - xhat[idx] * inv_n * sum_dx);
            }
            if (!gi[1].empty()) gi[1][j] += g[idx] * xhat[idx];
            if (!gi[2].empty()) gi[2][j] += g[idx];
          }
        }
      });
}

Tensor SliceRows(const Tensor& x, std::size_t begin, std::size_t count) {
  RequireMatrix(x, "slice_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (count == 0 || begin + count > m) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + ShapeToString(x.shape()));
  }
  auto xv = x.data();
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(begin * n),
                          xv.begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
  return MakeResult("slice_rows", {count, n}, std::move(out), {x},
                    [begin, n](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < g.size(); ++i) gi[0][begin * n + i] += g[i];
                    });
}

Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t count) {
  RequireMatrix(x, "slice_cols");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (count == 0 || begin + count > n) {
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + ShapeToString(x.shape()));
  }
  auto xv = x.data();
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = xv[i * n + begin + j];
  return MakeResult("slice_cols", {m, count}, std::move(out), {x},
                    [m, n, begin, count](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < count; ++j)
                          gi[0][i * n + begin + j] += g[i * count + j];
                    });
}

Tensor ConcatRows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const Tensor& p : parts) {
    RequireRowwise(p, "concat_rows");
    if (p.cols() != n) {
      throw DimensionError("concat_rows: width " + std::to_string(p.cols()) + " vs " +
                           std::to_string(n));
    }
    m += p.rows();
  }
  std::vector<double> out;
  out.reserve(m * n);
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return MakeResult("concat_rows", {m, n}, std::move(out),
                    std::vector<Tensor>(parts.begin(), parts.end()),
                    [offsets](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t p = 0; p < gi.size(); ++p) {
                        for (std::size_t i = 0; i < gi[p].size(); ++i)
                          gi[p][i] += g[offsets[p] + i];
                      }
                    });
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  std::vector<std::size_t> widths, offsets;
  for (const Tensor& p : parts) {
    RequireRowwise(p, "concat_cols");
    if (p.rows() != m) {
      throw DimensionError("concat_cols: height " + std::to_string(p.rows()) + " vs " +
                           std::to_string(m));
    }
    offsets.push_back(n);
    widths.push_back(p.cols());
    n += p.cols();
  }
  std::vector<double> out(m * n);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto pv = parts[p].data();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[p]; ++j)
        out[i * n + offsets[p] + j] = pv[i * widths[p] + j];
  }
  return MakeResult("concat_cols", {m, n}, std::move(out),
                    std::vector<Tensor>(parts.begin(), parts.end()),
                    [m, n, widths, offsets](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t p = 0; p < gi.size(); ++p) {
                        if (gi[p].empty()) continue;
                        for (std::size_t i = 0; i < m; ++i)
                          for (std::size_t j = 0; j < widths[p]; ++j)
                            gi[p][i * widths[p] + j] += g[i * n + offsets[p] + j];
                      }
                    });
}

Tensor GatherRows(const Tensor& table, std::span<const int> ids) {
  RequireMatrix(table, "gather_rows");
  const std::size_t v = table.shape()[0], d = table.shape()[1];
  if (ids.empty()) throw DimensionError("gather_rows: no ids");
  auto tv = table.data();
  std::vector<double> out(ids.size() * d);
  std::vector<int> idx(ids.begin(), ids.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= v) {
      throw VocabularyError("token id " + std::to_string(idx[i]) + " outside vocabulary of size " +
                            std::to_string(v));
    }
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d, out.begin() + i * d);
  }
  return MakeResult("gather_rows", {idx.size(), d}, std::move(out), {table},
                    [idx, d](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < idx.size(); ++i)
                        for (std::size_t j = 0; j < d; ++j)
                          gi[0][static_cast<std::size_t>(idx[i]) * d + j] += g[i * d + j];
                    });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.numel()) {
    throw DimensionError("reshape: " + ShapeToString(x.shape()) + " to " + ShapeToString(shape));
  }
  return MakeResult("reshape", std::move(shape), x.ToVector(), {x},
                    [](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i];
                    });
}

Tensor Dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate <= 0) return x;
  if (rate >= 1) throw DomainError("dropout rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.Uniform() < rate ? 0.0 : keep_scale;
  auto xv = x.data();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return MakeResult("dropout", x.shape(), std::move(out), {x},
                    [mask = std::move(mask)](const Node&, std::span<const double> g, GradIn gi) {
                      for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i] * mask[i];
                    });
}

}  // namespace spvs
