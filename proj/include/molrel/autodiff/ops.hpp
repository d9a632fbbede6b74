#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "molrel/autodiff/tape.hpp"
#include "molrel/core/random.hpp"

namespace molrel::ad {

// Differentiable operations. Every function records its result on the tape of
// its first input; all inputs must share that tape. Row-indexed ops
// (gather_rows, segment_*) act on the leading axis and accept any trailing
// shape, so a rank-1 tensor is treated as a column.

Var matmul(Var a, Var b);
/// x · wᵀ with w laid out (out_features, in_features).
Var linear(Var x, Var w);
Var add(Var a, Var b);
/// Adds a length-C row vector to every row of an (N, C) matrix.
Var add_row(Var x, Var row);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var divide(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var concat_cols(std::span<const Var> parts);

Var relu(Var x);
Var leaky_relu(Var x, double negative_slope = 0.2);
Var elu(Var x, double alpha = 1.0);
Var sigmoid(Var x);
Var exp(Var x);
Var log(Var x);
Var softplus(Var x);

Var gather_rows(Var x, std::span<const std::size_t> index);
/// out[s] = Σ_{r : segment[r] = s} x[r]; segments need not be sorted.
Var segment_sum(Var x, std::span<const std::size_t> segment, std::size_t n_segments);
/// Softmax of each column over the rows sharing a segment id.
Var segment_softmax(Var x, std::span<const std::size_t> segment, std::size_t n_segments);
/// Multiplies elementwise by a frozen keep/scale mask (0 or 1/(1-p)).
Var dropout(Var x, const Tensor& keep_scale);
/// Multiplies row r of an (N, C) matrix by s[r]; s has N entries.
Var scale_rows(Var x, Var s);

Var sum(Var x);
Var mean(Var x);

/// Mean binary cross-entropy with logits over cells where mask is 1, in the
/// overflow-free form max(z,0) - z·y + log1p(exp(-|z|)).
Var bce_with_logits(Var logits, const Tensor& labels, const Tensor& mask);

/// Inverted-dropout keep mask: each entry is 0 with probability p, else 1/(1-p).
Tensor dropout_mask(const Shape& shape, double p, Rng& rng);

// Generic dispatch over the op catalog.

enum class OpKind {
  kMatmul,
  kLinear,
  kAdd,
  kAddRow,
  kSub,
  kHadamard,
  kDivide,
  kScale,
  kAddScalar,
  kConcatCols,
  kRelu,
  kLeakyRelu,
  kElu,
  kSigmoid,
  kExp,
  kLog,
  kSoftplus,
  kGatherRows,
  kSegmentSum,
  kSegmentSoftmax,
  kDropout,
  kScaleRows,
  kSum,
  kMean,
  kBceWithLogits,
};

struct OpAttrs {
  std::vector<std::size_t> index;  // gather index or segment ids
  std::size_t n_segments = 0;
  double scalar = 0.0;  // scale factor, offset, slope or alpha
  Tensor mask;          // dropout keep mask, or BCE labels
  Tensor label_mask;    // BCE mask
};

std::string_view op_name(OpKind kind);
/// Throws for names outside the catalog.
OpKind op_from_name(std::string_view name);

Var forward_op(OpKind kind, std::span<const Var> inputs, const OpAttrs& attrs = {});

}  // namespace molrel::ad
