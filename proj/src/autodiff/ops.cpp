#include "molrel/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "molrel/core/error.hpp"

namespace molrel::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data().data(), t.rows(), t.cols()); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data().data(), t.rows(), t.cols()); }

Tape& shared_tape(std::string_view op, Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw Error(std::string(op) + ": inputs live on different tapes");
  return *a.tape;
}

[[noreturn]] void shape_mismatch(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch(op, a.shape(), b.shape());
}

void require_matrix(std::string_view op, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

std::size_t leading_extent(std::string_view op, const Tensor& t) {
  if (t.rank() == 0) throw ShapeError(std::string(op) + ": scalar has no rows");
  return t.shape()[0];
}

std::size_t row_width(const Tensor& t) {
  std::size_t w = 1;
  for (std::size_t i = 1; i < t.rank(); ++i) w *= t.shape()[i];
  return w;
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double stable_softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Elementwise unary op; dfdx receives (input, output).
template <class F, class D>
Var unary(Var x, F f, D dfdx) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), x.tape->requires_grad(x), [xid, dfdx](Tape& t, std::size_t self) {
    const Tensor& in = t.value(xid);
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad_buffer(self);
    Tensor& gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(in[i], y[i]);
  });
}

void check_segments(std::string_view op, std::span<const std::size_t> segment, std::size_t rows, std::size_t n) {
  if (segment.size() != rows) {
    throw ShapeError(std::string(op) + ": " + std::to_string(segment.size()) + " segment ids for " +
                     std::to_string(rows) + " rows");
  }
  for (std::size_t s : segment) {
    if (s >= n) {
      throw ShapeError(std::string(op) + ": segment id " + std::to_string(s) + " outside [0, " + std::to_string(n) +
                       ")");
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = shared_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  if (av.cols() != bv.rows()) shape_mismatch("matmul", av.shape(), bv.shape());
  Tensor out(Shape{av.rows(), bv.cols()});
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const std::size_t aid = a.id, bid = b.id;
  return tape.record(std::move(out), tape.requires_grad(a) || tape.requires_grad(b), [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(aid)) as_matrix(t.grad_buffer(aid)).noalias() += as_matrix(g) * as_matrix(t.value(bid)).transpose();
    if (t.requires_grad(bid)) as_matrix(t.grad_buffer(bid)).noalias() += as_matrix(t.value(aid)).transpose() * as_matrix(g);
  });
}

Var linear(Var x, Var w) {
  Tape& tape = shared_tape("linear", x, w);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  require_matrix("linear", xv);
  require_matrix("linear", wv);
  if (xv.cols() != wv.cols()) shape_mismatch("linear", xv.shape(), wv.shape());
  Tensor out(Shape{xv.rows(), wv.rows()});
  as_matrix(out).noalias() = as_matrix(xv) * as_matrix(wv).transpose();
  const std::size_t xid = x.id, wid = w.id;
  return tape.record(std::move(out), tape.requires_grad(x) || tape.requires_grad(w), [xid, wid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(xid)) as_matrix(t.grad_buffer(xid)).noalias() += as_matrix(g) * as_matrix(t.value(wid));
    if (t.requires_grad(wid)) as_matrix(t.grad_buffer(wid)).noalias() += as_matrix(g).transpose() * as_matrix(t.value(xid));
  });
}

Var add(Var a, Var b) {
  Tape& tape = shared_tape("add", a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  out += b.value();
  const std::size_t aid = a.id, bid = b.id;
  return tape.record(std::move(out), tape.requires_grad(a) || tape.requires_grad(b), [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(aid)) t.grad_buffer(aid) += g;
    if (t.requires_grad(bid)) t.grad_buffer(bid) += g;
  });
}

Var add_row(Var x, Var row) {
  Tape& tape = shared_tape("add_row", x, row);
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  require_matrix("add_row", xv);
  if (rv.size() != xv.cols() || rv.rank() > 2 || (rv.rank() == 2 && rv.shape()[0] != 1)) {
    shape_mismatch("add_row", xv.shape(), rv.shape());
  }
  Tensor out = xv;
  const std::size_t cols = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += rv[c];
  const std::size_t xid = x.id, rid = row.id;
  return tape.record(std::move(out), tape.requires_grad(x) || tape.requires_grad(row),
                     [xid, rid, cols](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad_buffer(self);
                       if (t.requires_grad(xid)) t.grad_buffer(xid) += g;
                       if (t.requires_grad(rid)) {
                         Tensor& gr = t.grad_buffer(rid);
                         const std::size_t rows = g.size() / cols;
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < cols; ++c) gr[c] += g[r * cols + c];
                       }
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = shared_tape("sub", a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.record(std::move(out), tape.requires_grad(a) || tape.requires_grad(b), [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(aid)) t.grad_buffer(aid) += g;
    if (t.requires_grad(bid)) {
      Tensor& gb = t.grad_buffer(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var hadamard(Var a, Var b) {
  Tape& tape = shared_tape("hadamard", a, b);
  require_same_shape("hadamard", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.record(std::move(out), tape.requires_grad(a) || tape.requires_grad(b), [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(aid)) {
      const Tensor& bv = t.value(bid);
      Tensor& ga = t.grad_buffer(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(bid)) {
      const Tensor& av = t.value(aid);
      Tensor& gb = t.grad_buffer(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var divide(Var a, Var b) {
  Tape& tape = shared_tape("divide", a, b);
  require_same_shape("divide", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.record(std::move(out), tape.requires_grad(a) || tape.requires_grad(b), [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& bv = t.value(bid);
    if (t.requires_grad(aid)) {
      Tensor& ga = t.grad_buffer(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (t.requires_grad(bid)) {
      const Tensor& y = t.value(self);
      Tensor& gb = t.grad_buffer(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * y[i] / bv[i];
    }
  });
}

Var scale(Var x, double factor) {
  return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset) {
  return unary(x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& tape = *parts[0].tape;
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> ids, widths;
  std::size_t total = 0;
  bool track = false;
  for (const Var& p : parts) {
    if (p.tape != &tape) throw Error("concat_cols: inputs live on different tapes");
    const Tensor& v = p.value();
    require_matrix("concat_cols", v);
    if (v.rows() != rows) shape_mismatch("concat_cols", parts[0].shape(), v.shape());
    ids.push_back(p.id);
    widths.push_back(v.cols());
    total += v.cols();
    track = track || tape.requires_grad(p);
  }
  Tensor out(Shape{rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data().begin() + r * widths[k], widths[k], out.data().begin() + r * total + offset);
    offset += widths[k];
  }
  return tape.record(std::move(out), track, [ids, widths, total](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const std::size_t rows = g.size() / total;
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        Tensor& gk = t.grad_buffer(ids[k]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c) gk[r * widths[k] + c] += g[r * total + off + c];
      }
      off += widths[k];
    }
  });
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double negative_slope) {
  return unary(
      x, [negative_slope](double v) { return v > 0.0 ? v : negative_slope * v; },
      [negative_slope](double v, double) { return v > 0.0 ? 1.0 : negative_slope; });
}

Var elu(Var x, double alpha) {
  return unary(
      x, [alpha](double v) { return v > 0.0 ? v : alpha * std::expm1(v); },
      [alpha](double v, double y) { return v > 0.0 ? 1.0 : y + alpha; });
}

Var sigmoid(Var x) {
  return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(Var x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var softplus(Var x) {
  return unary(x, stable_softplus, [](double v, double) { return stable_sigmoid(v); });
}

Var gather_rows(Var x, std::span<const std::size_t> index) {
  const Tensor& xv = x.value();
  const std::size_t n = leading_extent("gather_rows", xv);
  const std::size_t w = row_width(xv);
  Shape shape = xv.shape();
  shape[0] = index.size();
  Tensor out(shape);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= n) {
      throw ShapeError("gather_rows: index " + std::to_string(index[r]) + " outside " + std::to_string(n) + " rows");
    }
    std::copy_n(xv.data().begin() + index[r] * w, w, out.data().begin() + r * w);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), x.tape->requires_grad(x), [xid, w, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    Tensor& gx = t.grad_buffer(xid);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < w; ++c) gx[idx[r] * w + c] += g[r * w + c];
  });
}

Var segment_sum(Var x, std::span<const std::size_t> segment, std::size_t n_segments) {
  const Tensor& xv = x.value();
  const std::size_t rows = leading_extent("segment_sum", xv);
  check_segments("segment_sum", segment, rows, n_segments);
  const std::size_t w = row_width(xv);
  Shape shape = xv.shape();
  shape[0] = n_segments;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[segment[r] * w + c] += xv[r * w + c];
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), x.tape->requires_grad(x), [xid, w, seg = std::move(seg)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    Tensor& gx = t.grad_buffer(xid);
    for (std::size_t r = 0; r < seg.size(); ++r)
      for (std::size_t c = 0; c < w; ++c) gx[r * w + c] += g[seg[r] * w + c];
  });
}

Var segment_softmax(Var x, std::span<const std::size_t> segment, std::size_t n_segments) {
  const Tensor& xv = x.value();
  const std::size_t rows = leading_extent("segment_softmax", xv);
  check_segments("segment_softmax", segment, rows, n_segments);
  const std::size_t w = row_width(xv);
  std::vector<double> peak(n_segments * w, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) peak[segment[r] * w + c] = std::max(peak[segment[r] * w + c], xv[r * w + c]);
  Tensor out(xv.shape());
  std::vector<double> total(n_segments * w, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double e = std::exp(xv[r * w + c] - peak[segment[r] * w + c]);
      out[r * w + c] = e;
      total[segment[r] * w + c] += e;
    }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] /= total[segment[r] * w + c];
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  const std::size_t xid = x.id;
  return x.tape->record(
      std::move(out), x.tape->requires_grad(x),
      [xid, w, n_segments, seg = std::move(seg)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        const Tensor& y = t.value(self);
        std::vector<double> dot(n_segments * w, 0.0);
        for (std::size_t r = 0; r < seg.size(); ++r)
          for (std::size_t c = 0; c < w; ++c) dot[seg[r] * w + c] += g[r * w + c] * y[r * w + c];
        Tensor& gx = t.grad_buffer(xid);
        for (std::size_t r = 0; r < seg.size(); ++r)
          for (std::size_t c = 0; c < w; ++c) gx[r * w + c] += y[r * w + c] * (g[r * w + c] - dot[seg[r] * w + c]);
      });
}

Var dropout(Var x, const Tensor& keep_scale) {
  Tape& tape = *x.tape;
  Var mask = tape.constant(keep_scale);
  return hadamard(x, mask);
}

Var scale_rows(Var x, Var s) {
  Tape& tape = shared_tape("scale_rows", x, s);
  const Tensor& xv = x.value();
  const Tensor& sv = s.value();
  require_matrix("scale_rows", xv);
  if (sv.size() != xv.rows() || leading_extent("scale_rows", sv) != xv.rows()) {
    shape_mismatch("scale_rows", xv.shape(), sv.shape());
  }
  const std::size_t cols = xv.cols();
  Tensor out = xv;
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= sv[r];
  const std::size_t xid = x.id, sid = s.id;
  return tape.record(std::move(out), tape.requires_grad(x) || tape.requires_grad(s), [xid, sid, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const std::size_t rows = cols == 0 ? 0 : g.size() / cols;
    if (t.requires_grad(xid)) {
      const Tensor& sv = t.value(sid);
      Tensor& gx = t.grad_buffer(xid);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r * cols + c] * sv[r];
    }
    if (t.requires_grad(sid)) {
      const Tensor& xv = t.value(xid);
      Tensor& gs = t.grad_buffer(sid);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gs[r] += g[r * cols + c] * xv[r * cols + c];
    }
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double total = 0.0;
  for (double v : xv.data()) total += v;
  const std::size_t xid = x.id;
  return x.tape->record(Tensor::scalar(total), x.tape->requires_grad(x), [xid](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    for (double& v : t.grad_buffer(xid).data()) v += g;
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var bce_with_logits(Var logits, const Tensor& labels, const Tensor& mask) {
  const Tensor& z = logits.value();
  require_same_shape("bce_with_logits", z, labels);
  require_same_shape("bce_with_logits", z, mask);
  double count = 0.0, total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask[i] == 0.0) continue;
    count += 1.0;
    total += std::max(z[i], 0.0) - z[i] * labels[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  if (count == 0.0) throw DataError("bce_with_logits: batch has no labelled cells");
  const std::size_t zid = logits.id;
  return logits.tape->record(Tensor::scalar(total / count), logits.tape->requires_grad(logits),
                             [zid, labels, mask, count](Tape& t, std::size_t self) {
                               const double g = t.grad_buffer(self)[0] / count;
                               const Tensor& zv = t.value(zid);
                               Tensor& gz = t.grad_buffer(zid);
                               for (std::size_t i = 0; i < zv.size(); ++i) {
                                 if (mask[i] != 0.0) gz[i] += g * (stable_sigmoid(zv[i]) - labels[i]);
                               }
                             });
}

Tensor dropout_mask(const Shape& shape, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  Tensor mask(shape, 1.0);
  if (p == 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - p);
  const double kept = 1.0 / (1.0 - p);
  for (double& v : mask.data()) v = keep(rng) ? kept : 0.0;
  return mask;
}

namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 25> kOpNames{{
    {OpKind::kMatmul, "matmul"},
    {OpKind::kLinear, "linear"},
    {OpKind::kAdd, "add"},
    {OpKind::kAddRow, "add_row"},
    {OpKind::kSub, "sub"},
    {OpKind::kHadamard, "hadamard"},
    {OpKind::kDivide, "divide"},
    {OpKind::kScale, "scale"},
    {OpKind::kAddScalar, "add_scalar"},
    {OpKind::kConcatCols, "concat_cols"},
    {OpKind::kRelu, "relu"},
    {OpKind::kLeakyRelu, "leaky_relu"},
    {OpKind::kElu, "elu"},
    {OpKind::kSigmoid, "sigmoid"},
    {OpKind::kExp, "exp"},
    {OpKind::kLog, "log"},
    {OpKind::kSoftplus, "softplus"},
    {OpKind::kGatherRows, "gather_rows"},
    {OpKind::kSegmentSum, "segment_sum"},
    {OpKind::kSegmentSoftmax, "segment_softmax"},
    {OpKind::kDropout, "dropout"},
    {OpKind::kScaleRows, "scale_rows"},
    {OpKind::kSum, "sum"},
    {OpKind::kMean, "mean"},
    {OpKind::kBceWithLogits, "bce_with_logits"},
}};

void require_arity(OpKind kind, std::span<const Var> inputs, std::size_t n) {
  if (inputs.size() != n) {
    throw ShapeError(std::string(op_name(kind)) + ": expected " + std::to_string(n) + " inputs, got " +
                     std::to_string(inputs.size()));
  }
}

}  // namespace

std::string_view op_name(OpKind kind) {
  for (const auto& [k, name] : kOpNames)
    if (k == kind) return name;
  throw Error("unknown op kind " + std::to_string(static_cast<int>(kind)));
}

OpKind op_from_name(std::string_view name) {
  for (const auto& [k, n] : kOpNames)
    if (n == name) return k;
  throw Error("unknown op kind '" + std::string(name) + "'");
}

Var forward_op(OpKind kind, std::span<const Var> inputs, const OpAttrs& attrs) {
  switch (kind) {
    case OpKind::kMatmul: require_arity(kind, inputs, 2); return matmul(inputs[0], inputs[1]);
    case OpKind::kLinear: require_arity(kind, inputs, 2); return linear(inputs[0], inputs[1]);
    case OpKind::kAdd: require_arity(kind, inputs, 2); return add(inputs[0], inputs[1]);
    case OpKind::kAddRow: require_arity(kind, inputs, 2); return add_row(inputs[0], inputs[1]);
    case OpKind::kSub: require_arity(kind, inputs, 2); return sub(inputs[0], inputs[1]);
    case OpKind::kHadamard: require_arity(kind, inputs, 2); return hadamard(inputs[0], inputs[1]);
    case OpKind::kDivide: require_arity(kind, inputs, 2); return divide(inputs[0], inputs[1]);
    case OpKind::kScale: require_arity(kind, inputs, 1); return scale(inputs[0], attrs.scalar);
    case OpKind::kAddScalar: require_arity(kind, inputs, 1); return add_scalar(inputs[0], attrs.scalar);
    case OpKind::kConcatCols: return concat_cols(inputs);
    case OpKind::kRelu: require_arity(kind, inputs, 1); return relu(inputs[0]);
    case OpKind::kLeakyRelu: require_arity(kind, inputs, 1); return leaky_relu(inputs[0], attrs.scalar);
    case OpKind::kElu: require_arity(kind, inputs, 1); return elu(inputs[0], attrs.scalar);
    case OpKind::kSigmoid: require_arity(kind, inputs, 1); return sigmoid(inputs[0]);
    case OpKind::kExp: require_arity(kind, inputs, 1); return exp(inputs[0]);
    case OpKind::kLog: require_arity(kind, inputs, 1); return log(inputs[0]);
    case OpKind::kSoftplus: require_arity(kind, inputs, 1); return softplus(inputs[0]);
    case OpKind::kGatherRows: require_arity(kind, inputs, 1); return gather_rows(inputs[0], attrs.index);
    case OpKind::kSegmentSum:
      require_arity(kind, inputs, 1);
      return segment_sum(inputs[0], attrs.index, attrs.n_segments);
    case OpKind::kSegmentSoftmax:
      require_arity(kind, inputs, 1);
      return segment_softmax(inputs[0], attrs.index, attrs.n_segments);
    case OpKind::kDropout: require_arity(kind, inputs, 1); return dropout(inputs[0], attrs.mask);
    case OpKind::kScaleRows: require_arity(kind, inputs, 2); return scale_rows(inputs[0], inputs[1]);
    case OpKind::kSum: require_arity(kind, inputs, 1); return sum(inputs[0]);
    case OpKind::kMean: require_arity(kind, inputs, 1); return mean(inputs[0]);
    case OpKind::kBceWithLogits:
      require_arity(kind, inputs, 1);
      return bce_with_logits(inputs[0], attrs.mask, attrs.label_mask);
  }
  throw Error("unknown op kind " + std::to_string(static_cast<int>(kind)));
}

}  // namespace molrel::ad
