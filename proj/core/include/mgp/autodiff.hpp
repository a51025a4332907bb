#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "mgp/errors.hpp"
#include "mgp/parallel.hpp"

namespace mgp::ad {

// Reverse-mode automatic differentiation over dense row-major tensors.
//
// A Tape owns the whole graph: nodes are appended in program order, which is
// automatically a topological order, and backward() walks them in reverse.
// Gradients accumulate additively across fan-out and across repeated
// backward() calls; call zero_grad() between passes that should not mix.
//
// The scalar type is a template parameter: production networks run float
// with 64-bit accumulation inside reductions, the gradient-check suites
// instantiate double throughout.

using Shape = std::vector<int>;

inline std::int64_t numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  ScaleShift,
  MatMul,
  Affine,
  Relu,
  Elu,
  Tanh,
  Reshape,
  Concat,
  Slice,
  Select,
  SwapLast2,
  TrilFromPacked,
  Sum,
  SumSquares,
  MeanSqError,
  BceWithLogits,
};

template <typename T>
class Tape;

// Cheap handle into a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::int32_t id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Shape& shape() const;
  std::span<const T> value() const;
  std::span<const T> grad() const;  // empty until backward touches this node
  T scalar() const;
};

template <typename T>
class Tape {
 public:
  Var<T> leaf(Shape shape, std::span<const T> data, bool requires_grad = false) {
    check_payload(shape, data.size());
    Node n;
    n.op = Op::Leaf;
    n.requires_grad = requires_grad;
    n.shape = std::move(shape);
    n.value.assign(data.begin(), data.end());
    return push(std::move(n));
  }

  Var<T> leaf(Shape shape, std::initializer_list<T> data, bool requires_grad = false) {
    return leaf(std::move(shape), std::span<const T>(data.begin(), data.size()), requires_grad);
  }

  Var<T> constant(Shape shape, std::span<const T> data) { return leaf(std::move(shape), data, false); }

  Var<T> zeros(Shape shape, bool requires_grad = false) {
    Node n;
    n.op = Op::Leaf;
    n.requires_grad = requires_grad;
    n.value.assign(static_cast<std::size_t>(numel(shape)), T(0));
    n.shape = std::move(shape);
    return push(std::move(n));
  }

  // ---- elementwise ----

  Var<T> add(Var<T> a, Var<T> b) { return binary_same_shape(Op::Add, a, b); }
  Var<T> sub(Var<T> a, Var<T> b) { return binary_same_shape(Op::Sub, a, b); }
  Var<T> mul(Var<T> a, Var<T> b) { return binary_same_shape(Op::Mul, a, b); }

  Var<T> scale_shift(Var<T> x, double scale, double shift) {
    Node n = unary_node(Op::ScaleShift, x);
    n.d0 = scale;
    n.d1 = shift;
    n.value.resize(node(x.id).value.size());
    const auto& xv = node(x.id).value;
    for (std::size_t i = 0; i < xv.size(); ++i)
      n.value[i] = static_cast<T>(scale * static_cast<double>(xv[i]) + shift);
    return push(std::move(n));
  }

  Var<T> relu(Var<T> x) {
    Node n = unary_node(Op::Relu, x);
    const auto& xv = node(x.id).value;
    n.value.resize(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] > T(0) ? xv[i] : T(0);
    return push(std::move(n));
  }

  Var<T> elu(Var<T> x) {
    Node n = unary_node(Op::Elu, x);
    const auto& xv = node(x.id).value;
    n.value.resize(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i)
      n.value[i] = xv[i] >= T(0) ? xv[i] : static_cast<T>(std::exp(static_cast<double>(xv[i])) - 1.0);
    return push(std::move(n));
  }

  Var<T> tanh(Var<T> x) {
    Node n = unary_node(Op::Tanh, x);
    const auto& xv = node(x.id).value;
    n.value.resize(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i)
      n.value[i] = static_cast<T>(std::tanh(static_cast<double>(xv[i])));
    return push(std::move(n));
  }

  // ---- shape ----

  Var<T> reshape(Var<T> x, Shape shape) {
    if (numel(shape) != numel(node(x.id).shape))
      raise(ErrorKind::ShapeMismatch, "reshape: element count changes");
    Node n = unary_node(Op::Reshape, x);
    n.shape = std::move(shape);
    n.value = node(x.id).value;
    return push_exact(std::move(n));
  }

  Var<T> concat(std::span<const Var<T>> xs, int axis) {
    if (xs.empty()) raise(ErrorKind::ShapeMismatch, "concat: no inputs");
    for (const auto& x : xs) check_var(x);
    const Shape& s0 = node(xs[0].id).shape;
    const int rank = static_cast<int>(s0.size());
    if (axis < 0 || axis >= rank) raise(ErrorKind::ShapeMismatch, "concat: bad axis");
    Shape out = s0;
    out[static_cast<std::size_t>(axis)] = 0;
    for (const auto& x : xs) {
      const Shape& s = node(x.id).shape;
      if (static_cast<int>(s.size()) != rank) raise(ErrorKind::ShapeMismatch, "concat: rank mismatch");
      for (int d = 0; d < rank; ++d)
        if (d != axis && s[static_cast<std::size_t>(d)] != s0[static_cast<std::size_t>(d)])
          raise(ErrorKind::ShapeMismatch, "concat: shapes differ off-axis");
      out[static_cast<std::size_t>(axis)] += s[static_cast<std::size_t>(axis)];
    }
    Node n;
    n.op = Op::Concat;
    n.i0 = axis;
    n.requires_grad = false;
    for (const auto& x : xs) {
      n.extra.push_back(x.id);
      n.requires_grad = n.requires_grad || node(x.id).requires_grad;
    }
    n.shape = out;
    n.value.resize(static_cast<std::size_t>(numel(out)));
    // outer x (axis blocks) x inner copy
    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= s0[static_cast<std::size_t>(d)];
    for (int d = axis + 1; d < rank; ++d) inner *= s0[static_cast<std::size_t>(d)];
    const std::int64_t out_axis = out[static_cast<std::size_t>(axis)];
    std::int64_t axis_off = 0;
    for (const auto& x : xs) {
      const Node& xn = node(x.id);
      const std::int64_t ax = xn.shape[static_cast<std::size_t>(axis)];
      for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t a = 0; a < ax; ++a) {
          const T* src = xn.value.data() + (o * ax + a) * inner;
          T* dst = n.value.data() + (o * out_axis + axis_off + a) * inner;
          for (std::int64_t i = 0; i < inner; ++i) dst[i] = src[i];
        }
      axis_off += ax;
    }
    return push_exact(std::move(n));
  }

  Var<T> concat(std::initializer_list<Var<T>> xs, int axis) {
    return concat(std::span<const Var<T>>(xs.begin(), xs.size()), axis);
  }

  Var<T> slice(Var<T> x, int axis, int start, int len) {
    const Shape& s = node(x.id).shape;
    const int rank = static_cast<int>(s.size());
    if (axis < 0 || axis >= rank) raise(ErrorKind::ShapeMismatch, "slice: bad axis");
    const int ax = s[static_cast<std::size_t>(axis)];
    if (start < 0 || len < 1 || start + len > ax)
      raise(ErrorKind::ShapeMismatch, "slice: range out of bounds");
    Node n = unary_node(Op::Slice, x);
    n.i0 = axis;
    n.i1 = start;
    n.i2 = len;
    n.shape = s;
    n.shape[static_cast<std::size_t>(axis)] = len;
    n.value.resize(static_cast<std::size_t>(numel(n.shape)));
    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= s[static_cast<std::size_t>(d)];
    for (int d = axis + 1; d < rank; ++d) inner *= s[static_cast<std::size_t>(d)];
    const auto& xv = node(x.id).value;
    for (std::int64_t o = 0; o < outer; ++o)
      for (std::int64_t a = 0; a < len; ++a) {
        const T* src = xv.data() + (o * ax + start + a) * inner;
        T* dst = n.value.data() + (o * len + a) * inner;
        for (std::int64_t i = 0; i < inner; ++i) dst[i] = src[i];
      }
    return push_exact(std::move(n));
  }

  // Flat-index gather; duplicate indices accumulate additively on backward.
  Var<T> select(Var<T> x, std::vector<std::int64_t> idx) {
    const auto& xv = node(x.id).value;
    for (auto i : idx)
      if (i < 0 || i >= static_cast<std::int64_t>(xv.size()))
        raise(ErrorKind::ShapeMismatch, "select: index out of range");
    Node n = unary_node(Op::Select, x);
    n.shape = {static_cast<int>(idx.size())};
    n.value.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) n.value[i] = xv[static_cast<std::size_t>(idx[i])];
    n.extra = std::move(idx);
    return push_exact(std::move(n));
  }

  // (B x r x c) -> (B x c x r); rank-2 input treated as B = 1.
  Var<T> swap_last2(Var<T> x) {
    const Shape& s = node(x.id).shape;
    if (s.size() != 2 && s.size() != 3) raise(ErrorKind::ShapeMismatch, "swap_last2: rank must be 2 or 3");
    Node n = unary_node(Op::SwapLast2, x);
    n.shape = s;
    std::swap(n.shape[s.size() - 1], n.shape[s.size() - 2]);
    n.value.resize(node(x.id).value.size());
    transpose_batch(node(x.id).value.data(), n.value.data(), s);
    return push_exact(std::move(n));
  }

  // Packed lower triangle (row-major, n(n+1)/2 entries per item) to a dense
  // (B x) n x n lower-triangular matrix; the diagonal passes through exp()
  // so factors built from raw encoder outputs are always valid.
  Var<T> tril_from_packed(Var<T> x, int n_dim) {
    const std::int64_t m = static_cast<std::int64_t>(n_dim) * (n_dim + 1) / 2;
    const Shape& s = node(x.id).shape;
    const std::int64_t last = s.empty() ? 0 : s.back();
    if (last != m) raise(ErrorKind::ShapeMismatch, "tril_from_packed: last dim != n(n+1)/2");
    const std::int64_t batch = numel(s) / m;
    Node n = unary_node(Op::TrilFromPacked, x);
    n.i0 = n_dim;
    if (s.size() == 1)
      n.shape = {n_dim, n_dim};
    else
      n.shape = {static_cast<int>(batch), n_dim, n_dim};
    n.value.assign(static_cast<std::size_t>(batch) * n_dim * n_dim, T(0));
    const auto& xv = node(x.id).value;
    for (std::int64_t b = 0; b < batch; ++b) {
      const T* src = xv.data() + b * m;
      T* dst = n.value.data() + b * n_dim * n_dim;
      std::int64_t p = 0;
      for (int i = 0; i < n_dim; ++i) {
        for (int j = 0; j < i; ++j) dst[i * n_dim + j] = src[p++];
        dst[i * n_dim + i] = static_cast<T>(std::exp(static_cast<double>(src[p++])));
      }
    }
    return push_exact(std::move(n));
  }

  // ---- contractions ----

  // (r x k)(k x c), optionally batched on either side: (B x r x k)(B x k x c),
  // (r x k)(B x k x c), (B x r x k)(k x c).
  Var<T> matmul(Var<T> a, Var<T> b) {
    check_var(a);
    check_var(b);
    MatDims d = mat_dims(node(a.id).shape, node(b.id).shape);
    Node n;
    n.op = Op::MatMul;
    n.in = {a.id, b.id, -1};
    n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
    n.shape = d.batched_out ? Shape{static_cast<int>(d.batch), static_cast<int>(d.rows),
                                    static_cast<int>(d.cols)}
                            : Shape{static_cast<int>(d.rows), static_cast<int>(d.cols)};
    n.value.assign(static_cast<std::size_t>(d.batch * d.rows * d.cols), T(0));
    const auto& av = node(a.id).value;
    const auto& bv = node(b.id).value;
    for (std::int64_t i = 0; i < d.batch; ++i) {
      const T* ap = av.data() + (d.a_batched ? i : 0) * d.rows * d.inner;
      const T* bp = bv.data() + (d.b_batched ? i : 0) * d.inner * d.cols;
      gemm_nn(ap, bp, n.value.data() + i * d.rows * d.cols, d.rows, d.inner, d.cols, false);
    }
    return push_exact(std::move(n));
  }

  // x (R x in) * W (in x out) + bias (out), row-broadcast.
  Var<T> affine(Var<T> x, Var<T> w, Var<T> bias) {
    check_var(x);
    check_var(w);
    check_var(bias);
    const Shape& xs = node(x.id).shape;
    const Shape& ws = node(w.id).shape;
    const Shape& bs = node(bias.id).shape;
    if (xs.size() != 2 || ws.size() != 2 || bs.size() != 1 || xs[1] != ws[0] || ws[1] != bs[0])
      raise(ErrorKind::ShapeMismatch, "affine: want x(RxI) w(IxO) b(O)");
    Node n;
    n.op = Op::Affine;
    n.in = {x.id, w.id, bias.id};
    n.requires_grad = node(x.id).requires_grad || node(w.id).requires_grad ||
                      node(bias.id).requires_grad;
    const std::int64_t R = xs[0], I = xs[1], O = ws[1];
    n.shape = {static_cast<int>(R), static_cast<int>(O)};
    n.value.resize(static_cast<std::size_t>(R * O));
    const T* bv = node(bias.id).value.data();
    T* out = n.value.data();
    for (std::int64_t r = 0; r < R; ++r)
      for (std::int64_t o = 0; o < O; ++o) out[r * O + o] = bv[o];
    gemm_nn(node(x.id).value.data(), node(w.id).value.data(), out, R, I, O, true);
    return push_exact(std::move(n));
  }

  // ---- reductions (64-bit accumulation) ----

  Var<T> sum(Var<T> x) {
    Node n = unary_node(Op::Sum, x);
    n.shape = {1};
    double acc = 0.0;
    for (T v : node(x.id).value) acc += static_cast<double>(v);
    n.value = {static_cast<T>(acc)};
    return push_exact(std::move(n));
  }

  Var<T> sum_squares(Var<T> x) {
    Node n = unary_node(Op::SumSquares, x);
    n.shape = {1};
    double acc = 0.0;
    for (T v : node(x.id).value) acc += static_cast<double>(v) * static_cast<double>(v);
    n.value = {static_cast<T>(acc)};
    return push_exact(std::move(n));
  }

  Var<T> mean_sq_error(Var<T> pred, Var<T> target) {
    require_same_shape(pred, target, "mean_sq_error");
    Node n;
    n.op = Op::MeanSqError;
    n.in = {pred.id, target.id, -1};
    n.requires_grad = node(pred.id).requires_grad || node(target.id).requires_grad;
    n.shape = {1};
    const auto& pv = node(pred.id).value;
    const auto& tv = node(target.id).value;
    double acc = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      double d = static_cast<double>(pv[i]) - static_cast<double>(tv[i]);
      acc += d * d;
    }
    n.value = {static_cast<T>(acc / static_cast<double>(pv.size()))};
    return push_exact(std::move(n));
  }

  // Summed binary cross-entropy on logits: sum_i [softplus(l_i) - t_i l_i],
  // targets in [0, 1]. Stable form max(l,0) - l t + log1p(exp(-|l|)).
  Var<T> bce_with_logits(Var<T> logits, Var<T> targets) {
    require_same_shape(logits, targets, "bce_with_logits");
    Node n;
    n.op = Op::BceWithLogits;
    n.in = {logits.id, targets.id, -1};
    n.requires_grad = node(logits.id).requires_grad || node(targets.id).requires_grad;
    n.shape = {1};
    const auto& lv = node(logits.id).value;
    const auto& tv = node(targets.id).value;
    double acc = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      double l = static_cast<double>(lv[i]);
      double t = static_cast<double>(tv[i]);
      acc += std::max(l, 0.0) - l * t + std::log1p(std::exp(-std::fabs(l)));
    }
    n.value = {static_cast<T>(acc)};
    return push_exact(std::move(n));
  }

  // ---- reverse pass ----

  void backward(Var<T> root) {
    if (numel(node(root.id).shape) != 1)
      raise(ErrorKind::NonScalarRoot, "backward: root tensor is not a scalar");
    const T one = T(1);
    backward_seeded(root, std::span<const T>(&one, 1));
  }

  // Seeds the reverse pass with an arbitrary cotangent on `root`;
  // this is the J^T v primitive behind vjp().
  void backward_seeded(Var<T> root, std::span<const T> cotangent) {
    Node& rn = node(root.id);
    if (cotangent.size() != rn.value.size())
      raise(ErrorKind::ShapeMismatch, "backward_seeded: cotangent shape mismatch");
    if (!rn.requires_grad) return;
    ensure_grad(rn);
    for (std::size_t i = 0; i < cotangent.size(); ++i) rn.grad[i] += cotangent[i];
    for (std::int32_t id = root.id; id >= 0; --id) {
      Node& nd = nodes_[static_cast<std::size_t>(id)];
      if (!nd.requires_grad || nd.grad.empty() || nd.op == Op::Leaf) continue;
      dispatch_backward(nd);
    }
  }

  void zero_grad() {
    for (auto& n : nodes_) n.grad.clear();
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  friend struct Var<T>;

  struct MatDims {
    std::int64_t batch, rows, inner, cols;
    bool a_batched, b_batched, batched_out;
  };

  struct Node {
    Op op = Op::Leaf;
    bool requires_grad = false;
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    std::array<std::int32_t, 3> in{-1, -1, -1};
    std::vector<std::int64_t> extra;  // concat input ids / select indices
    int i0 = 0, i1 = 0, i2 = 0;       // axis / start / len / packed dim
    double d0 = 0.0, d1 = 0.0;        // scale / shift
  };

  std::vector<Node> nodes_;

  Node& node(std::int32_t id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }

  static void check_payload(const Shape& s, std::size_t len) {
    for (int d : s)
      if (d <= 0) raise(ErrorKind::ShapeMismatch, "tensor: dims must be positive");
    if (static_cast<std::int64_t>(len) != numel(s))
      raise(ErrorKind::ShapeMismatch, "tensor: data length != shape product");
  }

  Node unary_node(Op op, Var<T> x) {
    check_var(x);
    Node n;
    n.op = op;
    n.in = {x.id, -1, -1};
    n.requires_grad = node(x.id).requires_grad;
    n.shape = node(x.id).shape;
    return n;
  }

  void check_var(Var<T> x) const {
    if (x.tape != this || x.id < 0 || x.id >= static_cast<std::int32_t>(nodes_.size()))
      raise(ErrorKind::ShapeMismatch, "var does not belong to this tape");
  }

  void require_same_shape(Var<T> a, Var<T> b, const char* what) {
    check_var(a);
    check_var(b);
    if (node(a.id).shape != node(b.id).shape)
      raise(ErrorKind::ShapeMismatch, std::string(what) + ": operand shapes differ");
  }

  Var<T> binary_same_shape(Op op, Var<T> a, Var<T> b) {
    require_same_shape(a, b, "elementwise");
    Node n;
    n.op = op;
    n.in = {a.id, b.id, -1};
    n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad;
    n.shape = node(a.id).shape;
    const auto& av = node(a.id).value;
    const auto& bv = node(b.id).value;
    n.value.resize(av.size());
    switch (op) {
      case Op::Add:
        for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
        break;
      case Op::Mul:
        for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
        break;
      default:
        raise(ErrorKind::Internal, "binary_same_shape: bad op");
    }
    return push_exact(std::move(n));
  }

  Var<T> push(Node n) { return push_exact(std::move(n)); }

  Var<T> push_exact(Node n) {
    nodes_.push_back(std::move(n));
    return Var<T>{this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  void ensure_grad(Node& n) {
    if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
  }

  static MatDims mat_dims(const Shape& as, const Shape& bs) {
    auto bad = [] { raise(ErrorKind::ShapeMismatch, "matmul: incompatible shapes"); };
    if ((as.size() != 2 && as.size() != 3) || (bs.size() != 2 && bs.size() != 3)) bad();
    MatDims d{};
    d.a_batched = as.size() == 3;
    d.b_batched = bs.size() == 3;
    std::int64_t ab = d.a_batched ? as[0] : 1;
    std::int64_t bb = d.b_batched ? bs[0] : 1;
    d.rows = d.a_batched ? as[1] : as[0];
    std::int64_t ak = d.a_batched ? as[2] : as[1];
    std::int64_t bk = d.b_batched ? bs[1] : bs[0];
    d.cols = d.b_batched ? bs[2] : bs[1];
    if (ak != bk) bad();
    d.inner = ak;
    if (d.a_batched && d.b_batched && ab != bb) bad();
    d.batch = std::max(ab, bb);
    d.batched_out = d.a_batched || d.b_batched;
    return d;
  }

  // C (r x c) (+)= A (r x k) * B (k x c). Row-parallel; each output element
  // accumulates over k in ascending order regardless of thread count, so
  // results do not depend on MGP_THREADS.
  static void gemm_nn(const T* A, const T* B, T* C, std::int64_t r, std::int64_t k,
                      std::int64_t c, bool accumulate) {
    auto body = [&](std::int64_t i0, std::int64_t i1) {
      for (std::int64_t i = i0; i < i1; ++i) {
        T* crow = C + i * c;
        if (!accumulate)
          for (std::int64_t j = 0; j < c; ++j) crow[j] = T(0);
        const T* arow = A + i * k;
        for (std::int64_t kk = 0; kk < k; ++kk) {
          const T a = arow[kk];
          const T* brow = B + kk * c;
          for (std::int64_t j = 0; j < c; ++j) crow[j] += a * brow[j];
        }
      }
    };
    if (r * k * c >= 1 << 18)
      parallel_for_chunks(r, body);
    else
      body(0, r);
  }

  // C (r x c) += A (r x k) * B^T (c x k).
  static void gemm_nt(const T* A, const T* B, T* C, std::int64_t r, std::int64_t k,
                      std::int64_t c) {
    auto body = [&](std::int64_t i0, std::int64_t i1) {
      for (std::int64_t i = i0; i < i1; ++i) {
        const T* arow = A + i * k;
        T* crow = C + i * c;
        for (std::int64_t j = 0; j < c; ++j) {
          const T* brow = B + j * k;
          T acc = T(0);
          for (std::int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
          crow[j] += acc;
        }
      }
    };
    if (r * k * c >= 1 << 18)
      parallel_for_chunks(r, body);
    else
      body(0, r);
  }

  // C (k x c) += A^T: A (r x k), B (r x c).
  static void gemm_tn(const T* A, const T* B, T* C, std::int64_t r, std::int64_t k,
                      std::int64_t c) {
    auto body = [&](std::int64_t i0, std::int64_t i1) {
      for (std::int64_t i = i0; i < i1; ++i) {  // i indexes columns of A = rows of C
        T* crow = C + i * c;
        for (std::int64_t rr = 0; rr < r; ++rr) {
          const T a = A[rr * k + i];
          const T* brow = B + rr * c;
          for (std::int64_t j = 0; j < c; ++j) crow[j] += a * brow[j];
        }
      }
    };
    if (r * k * c >= 1 << 18)
      parallel_for_chunks(k, body);
    else
      body(0, k);
  }

  static void transpose_batch(const T* src, T* dst, const Shape& s) {
    const bool batched = s.size() == 3;
    const std::int64_t B = batched ? s[0] : 1;
    const std::int64_t r = batched ? s[1] : s[0];
    const std::int64_t c = batched ? s[2] : s[1];
    for (std::int64_t b = 0; b < B; ++b) {
      const T* sp = src + b * r * c;
      T* dp = dst + b * r * c;
      for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j) dp[j * r + i] = sp[i * c + j];
    }
  }

  void add_into_grad(std::int32_t id, const std::vector<T>& contribution) {
    Node& n = node(id);
    if (!n.requires_grad) return;
    ensure_grad(n);
    for (std::size_t i = 0; i < contribution.size(); ++i) n.grad[i] += contribution[i];
  }

  void dispatch_backward(Node& nd) {
    switch (nd.op) {
      case Op::Leaf:
        break;
      case Op::Add: {
        propagate_ew(nd, 0, [](T g, const Node&, std::size_t) { return g; });
        propagate_ew(nd, 1, [](T g, const Node&, std::size_t) { return g; });
        break;
      }
      case Op::Sub: {
        propagate_ew(nd, 0, [](T g, const Node&, std::size_t) { return g; });
        propagate_ew(nd, 1, [](T g, const Node&, std::size_t) { return -g; });
        break;
      }
      case Op::Mul: {
        Node& a = node(nd.in[0]);
        Node& b = node(nd.in[1]);
        if (a.requires_grad) {
          ensure_grad(a);
          for (std::size_t i = 0; i < nd.grad.size(); ++i) a.grad[i] += nd.grad[i] * b.value[i];
        }
        if (b.requires_grad) {
          ensure_grad(b);
          for (std::size_t i = 0; i < nd.grad.size(); ++i) b.grad[i] += nd.grad[i] * a.value[i];
        }
        break;
      }
      case Op::ScaleShift: {
        Node& x = node(nd.in[0]);
        if (x.requires_grad) {
          ensure_grad(x);
          const T s = static_cast<T>(nd.d0);
          for (std::size_t i = 0; i < nd.grad.size(); ++i) x.grad[i] += s * nd.grad[i];
        }
        break;
      }
      case Op::Relu: {
        Node& x = node(nd.in[0]);
        if (x.requires_grad) {
          ensure_grad(x);
          for (std::size_t i = 0; i < nd.grad.size(); ++i)
            if (x.value[i] > T(0)) x.grad[i] += nd.grad[i];
        }
        break;
      }
      case Op::Elu: {
        Node& x = node(nd.in[0]);
        if (x.requires_grad) {
          ensure_grad(x);
          for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            const T d = x.value[i] >= T(0) ? T(1) : nd.value[i] + T(1);  // e^x = y + 1 below 0
            x.grad[i] += d * nd.grad[i];
          }
        }
        break;
      }
      case Op::Tanh: {
        Node& x = node(nd.in[0]);
        if (x.requires_grad) {
          ensure_grad(x);
          for (std::size_t i = 0; i < nd.grad.size(); ++i)
            x.grad[i] += (T(1) - nd.value[i] * nd.value[i]) * nd.grad[i];
        }
        break;
      }
      case Op::Reshape: {
        Node& x = node(nd.in[0]);
        if (x.requires_grad) {
          ensure_grad(x);
          for (std::size_t i = 0; i < nd.grad.size(); ++i) x.grad[i] += nd.grad[i];
        }
        break;
      }
      case Op::Concat: {
        const int axis = nd.i0;
        const int rank = static_cast<int>(nd.shape.size());
        std::int64_t outer = 1, inner = 1;
        for (int d = 0; d < axis; ++d) outer *= nd.shape[static_cast<std::size_t>(d)];
        for (int d = axis + 1; d < rank; ++d) inner *= nd.shape[static_cast<std::size_t>(d)];
        const std::int64_t out_axis = nd.shape[static_cast<std::size_t>(axis)];
        std::int64_t axis_off = 0;
        for (std::int64_t xid : nd.extra) {
          Node& x = node(static_cast<std::int32_t>(xid));
          const std::int64_t ax = x.shape[static_cast<std::size_t>(axis)];
          if (x.requires_grad) {
            ensure_grad(x);
            for (std::int64_t o = 0; o < outer; ++o)
              for (std::int64_t a = 0; a < ax; ++a) {
                const T* src = nd.grad.data() + (o * out_axis + axis_off + a) * inner;
                T* dst = x.grad.data() + (o * ax + a) * inner;
                for (std::int64_t i = 0; i < inner; ++i) dst[i] += src[i];
              }
          }
          axis_off += ax;
        }
        break;
      }
      case Op::Slice: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        const int axis = nd.i0, start = nd.i1, len = nd.i2;
        const Shape& s = x.shape;
        const int rank = static_cast<int>(s.size());
        std::int64_t outer = 1, inner = 1;
        for (int d = 0; d < axis; ++d) outer *= s[static_cast<std::size_t>(d)];
        for (int d = axis + 1; d < rank; ++d) inner *= s[static_cast<std::size_t>(d)];
        const std::int64_t ax = s[static_cast<std::size_t>(axis)];
        for (std::int64_t o = 0; o < outer; ++o)
          for (std::int64_t a = 0; a < len; ++a) {
            const T* src = nd.grad.data() + (o * len + a) * inner;
            T* dst = x.grad.data() + (o * ax + start + a) * inner;
            for (std::int64_t i = 0; i < inner; ++i) dst[i] += src[i];
          }
        break;
      }
      case Op::Select: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        for (std::size_t i = 0; i < nd.extra.size(); ++i)
          x.grad[static_cast<std::size_t>(nd.extra[i])] += nd.grad[i];
        break;
      }
      case Op::SwapLast2: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        // transpose the gradient back: nd.shape is the swapped shape
        std::vector<T> tmp(nd.grad.size());
        transpose_batch(nd.grad.data(), tmp.data(), nd.shape);
        for (std::size_t i = 0; i < tmp.size(); ++i) x.grad[i] += tmp[i];
        break;
      }
      case Op::TrilFromPacked: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        const int n_dim = nd.i0;
        const std::int64_t m = static_cast<std::int64_t>(n_dim) * (n_dim + 1) / 2;
        const std::int64_t batch = static_cast<std::int64_t>(nd.value.size()) / (n_dim * n_dim);
        for (std::int64_t b = 0; b < batch; ++b) {
          const T* g = nd.grad.data() + b * n_dim * n_dim;
          const T* y = nd.value.data() + b * n_dim * n_dim;
          T* gx = x.grad.data() + b * m;
          std::int64_t p = 0;
          for (int i = 0; i < n_dim; ++i) {
            for (int j = 0; j < i; ++j) gx[p++] += g[i * n_dim + j];
            gx[p++] += g[i * n_dim + i] * y[i * n_dim + i];  // d exp(r)/dr = exp(r)
          }
        }
        break;
      }
      case Op::MatMul: {
        Node& a = node(nd.in[0]);
        Node& b = node(nd.in[1]);
        MatDims d = mat_dims(a.shape, b.shape);
        for (std::int64_t i = 0; i < d.batch; ++i) {
          const T* gp = nd.grad.data() + i * d.rows * d.cols;
          const T* ap = a.value.data() + (d.a_batched ? i : 0) * d.rows * d.inner;
          const T* bp = b.value.data() + (d.b_batched ? i : 0) * d.inner * d.cols;
          if (a.requires_grad) {
            ensure_grad(a);
            T* gap = a.grad.data() + (d.a_batched ? i : 0) * d.rows * d.inner;
            gemm_nt(gp, bp, gap, d.rows, d.cols, d.inner);
          }
          if (b.requires_grad) {
            ensure_grad(b);
            T* gbp = b.grad.data() + (d.b_batched ? i : 0) * d.inner * d.cols;
            gemm_tn(ap, gp, gbp, d.rows, d.inner, d.cols);
          }
        }
        break;
      }
      case Op::Affine: {
        Node& x = node(nd.in[0]);
        Node& w = node(nd.in[1]);
        Node& bias = node(nd.in[2]);
        const std::int64_t R = x.shape[0], I = x.shape[1], O = w.shape[1];
        if (x.requires_grad) {
          ensure_grad(x);
          gemm_nt(nd.grad.data(), w.value.data(), x.grad.data(), R, O, I);
        }
        if (w.requires_grad) {
          ensure_grad(w);
          gemm_tn(x.value.data(), nd.grad.data(), w.grad.data(), R, I, O);
        }
        if (bias.requires_grad) {
          ensure_grad(bias);
          for (std::int64_t r = 0; r < R; ++r) {
            const T* g = nd.grad.data() + r * O;
            for (std::int64_t o = 0; o < O; ++o) bias.grad[static_cast<std::size_t>(o)] += g[o];
          }
        }
        break;
      }
      case Op::Sum: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        const T g = nd.grad[0];
        for (auto& gx : x.grad) gx += g;
        break;
      }
      case Op::SumSquares: {
        Node& x = node(nd.in[0]);
        if (!x.requires_grad) break;
        ensure_grad(x);
        const T g = nd.grad[0];
        for (std::size_t i = 0; i < x.grad.size(); ++i) x.grad[i] += T(2) * x.value[i] * g;
        break;
      }
      case Op::MeanSqError: {
        Node& a = node(nd.in[0]);
        Node& b = node(nd.in[1]);
        const T g = nd.grad[0];
        const T inv_n = static_cast<T>(1.0 / static_cast<double>(a.value.size()));
        if (a.requires_grad) {
          ensure_grad(a);
          for (std::size_t i = 0; i < a.grad.size(); ++i)
            a.grad[i] += T(2) * (a.value[i] - b.value[i]) * inv_n * g;
        }
        if (b.requires_grad) {
          ensure_grad(b);
          for (std::size_t i = 0; i < b.grad.size(); ++i)
            b.grad[i] -= T(2) * (a.value[i] - b.value[i]) * inv_n * g;
        }
        break;
      }
      case Op::BceWithLogits: {
        Node& l = node(nd.in[0]);
        Node& t = node(nd.in[1]);
        const T g = nd.grad[0];
        if (l.requires_grad) {
          ensure_grad(l);
          for (std::size_t i = 0; i < l.grad.size(); ++i) {
            double li = static_cast<double>(l.value[i]);
            double sig = 1.0 / (1.0 + std::exp(-li));
            l.grad[i] += g * static_cast<T>(sig - static_cast<double>(t.value[i]));
          }
        }
        if (t.requires_grad) {
          ensure_grad(t);
          for (std::size_t i = 0; i < t.grad.size(); ++i) t.grad[i] -= g * l.value[i];
        }
        break;
      }
    }
  }

  template <typename F>
  void propagate_ew(Node& nd, int slot, F&& f) {
    Node& x = node(nd.in[static_cast<std::size_t>(slot)]);
    if (!x.requires_grad) return;
    ensure_grad(x);
    for (std::size_t i = 0; i < nd.grad.size(); ++i) x.grad[i] += f(nd.grad[i], x, i);
  }
};

template <typename T>
const Shape& Var<T>::shape() const {
  return tape->node(id).shape;
}

template <typename T>
std::span<const T> Var<T>::value() const {
  return tape->node(id).value;
}

template <typename T>
std::span<const T> Var<T>::grad() const {
  return tape->node(id).grad;
}

template <typename T>
T Var<T>::scalar() const {
  const auto& v = tape->node(id).value;
  if (v.size() != 1) raise(ErrorKind::ShapeMismatch, "scalar(): tensor has more than one element");
  return v[0];
}

// (df/dz)^T cotangent for a tape-built map z -> f(z), one reverse pass.
template <typename T, typename BuildFn>
std::vector<T> vjp(BuildFn&& build, std::span<const T> z, std::span<const T> cotangent,
                   Shape z_shape = {}) {
  Tape<T> tape;
  if (z_shape.empty()) z_shape = {static_cast<int>(z.size())};
  Var<T> zv = tape.leaf(z_shape, z, /*requires_grad=*/true);
  Var<T> y = build(tape, zv);
  if (cotangent.size() != static_cast<std::size_t>(numel(y.shape())))
    raise(ErrorKind::ShapeMismatch, "vjp: cotangent does not match output shape");
  tape.backward_seeded(y, cotangent);
  auto g = zv.grad();
  std::vector<T> out(z.size(), T(0));
  if (!g.empty()) out.assign(g.begin(), g.end());
  return out;
}

}  // namespace mgp::ad
