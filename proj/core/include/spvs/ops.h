#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spvs/rng.h"
#include "spvs/tensor.h"

// Differentiable tensor operations. Matrices are rank-2 row-major tensors;
// row-wise operations also accept a rank-1 tensor as a single row.
namespace spvs {

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// Equal shapes, or either side holding a single element (scalar broadcast).
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);

// x[M x N] + v[N] added to every row.
Tensor AddRowVector(const Tensor& x, const Tensor& v);
// x[M x N] with row i multiplied by s[i].
Tensor ScaleRows(const Tensor& x, const Tensor& s);

Tensor Scale(const Tensor& x, double factor);
Tensor AddScalar(const Tensor& x, double offset);
Tensor Negate(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Relu(const Tensor& x);
Tensor Gelu(const Tensor& x);
Tensor Exp(const Tensor& x);
Tensor Log(const Tensor& x);
Tensor Sqrt(const Tensor& x);
Tensor Square(const Tensor& x);
// Gradient passes only where lo <= x <= hi.
Tensor Clamp(const Tensor& x, double lo, double hi);

Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
// [M x N] -> [M]
Tensor RowL2Norm(const Tensor& x);
// All-zero rows are returned unchanged; their indices are reported through
// zero_rows when provided.
Tensor L2NormalizeRows(const Tensor& x, std::vector<std::size_t>* zero_rows = nullptr);
// key_valid (length N, optional) excludes columns from every row's softmax;
// excluded entries come out exactly zero.
Tensor SoftmaxRows(const Tensor& x, std::span<const std::uint8_t> key_valid = {});
inline constexpr double kLayerNormEpsilon = 1e-5;
Tensor LayerNormRows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                     double epsilon = kLayerNormEpsilon);

Tensor SliceRows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor ConcatRows(std::span<const Tensor> parts);
Tensor ConcatCols(std::span<const Tensor> parts);
// Rows of table[V x D] selected by ids.
Tensor GatherRows(const Tensor& table, std::span<const int> ids);
Tensor Reshape(const Tensor& x, Shape shape);
// Inverted dropout; identity when rate == 0.
Tensor Dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace spvs
