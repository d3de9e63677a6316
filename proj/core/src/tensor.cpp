#include "dkg/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "dkg/error.hpp"

namespace dkg {

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Long recurrent chains would otherwise recurse once per node on release.
  ~Node() {
    std::vector<std::shared_ptr<Node>> pending = std::move(parents);
    while (!pending.empty()) {
      std::shared_ptr<Node> n = std::move(pending.back());
      pending.pop_back();
      if (n && n.use_count() == 1) {
        for (auto& p : n->parents) pending.push_back(std::move(p));
        n->parents.clear();
      }
    }
  }

  std::vector<Real>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

struct TensorAccess {
  static const NodePtr& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(NodePtr n) { return Tensor(std::move(n)); }
};

namespace {

thread_local bool g_grad_enabled = true;

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::size_t product(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
  }
}

const Node& node_of(const Tensor& t, const char* op) {
  const auto& n = TensorAccess::node(t);
  if (!n) throw Error(std::string(op) + ": undefined tensor");
  return *n;
}

void require_matrix(const Tensor& t, const char* op) {
  if (node_of(t, op).shape.size() != 2) {
    throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " + to_string(t.shape()));
  }
}

NodePtr make_leaf(Shape shape, std::vector<Real> values, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return n;
}

// Builds an op result. Parents and the backward closure are kept only when
// recording is on and some parent needs a gradient.
Tensor make_result(Shape shape, std::vector<Real> values, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backward_fn) {
  auto n = make_leaf(std::move(shape), std::move(values), false);
  if (g_grad_enabled) {
    bool any = std::any_of(parents.begin(), parents.end(),
                           [](const NodePtr& p) { return p->requires_grad; });
    if (any) {
      n->requires_grad = true;
      n->parents = std::move(parents);
      n->backward = std::move(backward_fn);
    }
  }
  return TensorAccess::wrap(std::move(n));
}

// Extents of a broadcast binary op.
Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a.size() != 2 || b.size() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 operands, got " + to_string(a) +
                     " and " + to_string(b));
  }
  Shape out(2);
  for (int d = 0; d < 2; ++d) {
    if (a[d] == b[d] || b[d] == 1) {
      out[d] = a[d];
    } else if (a[d] == 1) {
      out[d] = b[d];
    } else {
      throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a) + " with " +
                       to_string(b));
    }
  }
  return out;
}

inline std::size_t bidx(const Shape& s, std::size_t r, std::size_t c) {
  return (s[0] == 1 ? 0 : r) * s[1] + (s[1] == 1 ? 0 : c);
}

template <typename Fwd, typename DA, typename DB>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, DA da,
                        DB db) {
  const Node& na = node_of(a, op);
  const Node& nb = node_of(b, op);
  Shape out = broadcast_shape(na.shape, nb.shape, op);
  std::vector<Real> v(out[0] * out[1]);
  for (std::size_t r = 0; r < out[0]; ++r) {
    for (std::size_t c = 0; c < out[1]; ++c) {
      v[r * out[1] + c] = fwd(na.value[bidx(na.shape, r, c)], nb.value[bidx(nb.shape, r, c)]);
    }
  }
  return make_result(out, std::move(v), {TensorAccess::node(a), TensorAccess::node(b)},
                     [out, da, db](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       for (std::size_t r = 0; r < out[0]; ++r) {
                         for (std::size_t c = 0; c < out[1]; ++c) {
                           const std::size_t o = r * out[1] + c;
                           const std::size_t ia = bidx(pa.shape, r, c);
                           const std::size_t ib = bidx(pb.shape, r, c);
                           const Real g = self.grad[o];
                           if (pa.requires_grad) {
                             pa.ensure_grad()[ia] += g * da(pa.value[ia], pb.value[ib]);
                           }
                           if (pb.requires_grad) {
                             pb.ensure_grad()[ib] += g * db(pa.value[ia], pb.value[ib]);
                           }
                         }
                       }
                     });
}

// Elementwise unary op whose derivative is a function of (input, output).
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, const char* op, Fwd fwd, Deriv deriv) {
  const Node& na = node_of(a, op);
  std::vector<Real> v(na.value.size());
  std::transform(na.value.begin(), na.value.end(), v.begin(), fwd);
  return make_result(na.shape, std::move(v), {TensorAccess::node(a)}, [deriv](Node& self) {
    Node& p = *self.parents[0];
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
    }
  });
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, Real value, bool requires_grad) {
  check_shape(shape);
  const std::size_t n = product(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<Real>(n, value), requires_grad));
}

Tensor Tensor::from_values(Shape shape, std::vector<Real> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != product(shape)) {
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     to_string(shape));
  }
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(Real value) { return from_values({1, 1}, {value}); }

Tensor Tensor::row(std::vector<Real> values) {
  const std::size_t n = values.size();
  return from_values({1, n}, std::move(values));
}

const Shape& Tensor::shape() const { return node_of(*this, "shape").shape; }
std::size_t Tensor::size() const { return node_of(*this, "size").value.size(); }

std::size_t Tensor::rows() const {
  require_matrix(*this, "rows");
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  require_matrix(*this, "cols");
  return node_->shape[1];
}

std::span<const Real> Tensor::values() const { return node_of(*this, "values").value; }

std::span<Real> Tensor::mutable_values() {
  node_of(*this, "mutable_values");
  return node_->value;
}

Real Tensor::item() const {
  const Node& n = node_of(*this, "item");
  if (n.value.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(n.shape));
  return n.value[0];
}

Real Tensor::at(std::size_t r, std::size_t c) const {
  require_matrix(*this, "at");
  if (r >= node_->shape[0] || c >= node_->shape[1]) {
    throw ShapeError("index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") outside shape " + to_string(node_->shape));
  }
  return node_->value[r * node_->shape[1] + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  node_of(*this, "set_requires_grad");
  node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }

std::span<const Real> Tensor::grad() const {
  node_of(*this, "grad");
  return node_->grad;
}

std::span<Real> Tensor::mutable_grad() {
  node_of(*this, "mutable_grad");
  return node_->ensure_grad();
}

void Tensor::zero_grad() {
  node_of(*this, "zero_grad");
  node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::clear_grad() {
  node_of(*this, "clear_grad");
  node_->grad.clear();
  node_->grad.shrink_to_fit();
}

Tensor Tensor::detach() const {
  const Node& n = node_of(*this, "detach");
  return Tensor(make_leaf(n.shape, n.value, false));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner dimensions differ for " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  std::vector<Real> v(m * n);
  MutMap(v.data(), m, n).noalias() =
      ConstMap(a.values().data(), m, k) * ConstMap(b.values().data(), k, n);
  return make_result({m, n}, std::move(v), {TensorAccess::node(a), TensorAccess::node(b)},
                     [m, k, n](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       ConstMap g(self.grad.data(), m, n);
                       if (pa.requires_grad) {
                         MutMap(pa.ensure_grad().data(), m, k).noalias() +=
                             g * ConstMap(pb.value.data(), k, n).transpose();
                       }
                       if (pb.requires_grad) {
                         MutMap(pb.ensure_grad().data(), k, n).noalias() +=
                             ConstMap(pa.value.data(), m, k).transpose() * g;
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Real> v(m * n);
  MutMap(v.data(), n, m) = ConstMap(a.values().data(), m, n).transpose();
  return make_result({n, m}, std::move(v), {TensorAccess::node(a)}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    MutMap(p.ensure_grad().data(), m, n) += ConstMap(self.grad.data(), n, m).transpose();
  });
}

// ---------------------------------------------------------------------------
// Elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "add", [](Real x, Real y) { return x + y; }, [](Real, Real) { return 1.0; },
      [](Real, Real) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "sub", [](Real x, Real y) { return x - y; }, [](Real, Real) { return 1.0; },
      [](Real, Real) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_binary(
      a, b, "mul", [](Real x, Real y) { return x * y; }, [](Real, Real y) { return y; },
      [](Real x, Real) { return x; });
}

Tensor scale(const Tensor& a, Real factor) {
  return unary(
      a, "scale", [factor](Real x) { return x * factor; },
      [factor](Real, Real) { return factor; });
}

Tensor add_scalar(const Tensor& a, Real offset) {
  return unary(
      a, "add_scalar", [offset](Real x) { return x + offset; }, [](Real, Real) { return 1.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid",
      [](Real x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const Real e = std::exp(x);
        return e / (1.0 + e);
      },
      [](Real, Real y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](Real x) { return std::tanh(x); }, [](Real, Real y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](Real x) { return x > 0 ? x : 0.0; },
      [](Real x, Real) { return x > 0 ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Structural

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw ShapeError("concat_cols: row counts differ, " + to_string(parts[0].shape()) +
                       " vs " + to_string(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<Real> v(m * total);
  std::vector<NodePtr> parents;
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].values();
    for (std::size_t r = 0; r < m; ++r) {
      std::copy_n(src.begin() + r * widths[k], widths[k], v.begin() + r * total + off);
    }
    off += widths[k];
    parents.push_back(TensorAccess::node(parts[k]));
  }
  return make_result({m, total}, std::move(v), std::move(parents),
                     [m, total, widths](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         Node& p = *self.parents[k];
                         if (p.requires_grad) {
                           auto& g = p.ensure_grad();
                           for (std::size_t r = 0; r < m; ++r) {
                             for (std::size_t c = 0; c < widths[k]; ++c) {
                               g[r * widths[k] + c] += self.grad[r * total + off + c];
                             }
                           }
                         }
                         off += widths[k];
                       }
                     });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw ShapeError("concat_rows: column counts differ, " + to_string(parts[0].shape()) +
                       " vs " + to_string(p.shape()));
    }
    total += p.rows();
    sizes.push_back(p.size());
  }
  std::vector<Real> v;
  v.reserve(total * n);
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    auto src = p.values();
    v.insert(v.end(), src.begin(), src.end());
    parents.push_back(TensorAccess::node(p));
  }
  return make_result({total, n}, std::move(v), std::move(parents), [sizes](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      Node& p = *self.parents[k];
      if (p.requires_grad) {
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += self.grad[off + i];
      }
      off += sizes[k];
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols();
  if (begin >= end || end > n) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + to_string(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<Real> v(m * w);
  auto src = a.values();
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(src.begin() + r * n + begin, w, v.begin() + r * w);
  }
  return make_result({m, w}, std::move(v), {TensorAccess::node(a)},
                     [m, n, w, begin](Node& self) {
                       auto& g = self.parents[0]->ensure_grad();
                       for (std::size_t r = 0; r < m; ++r) {
                         for (std::size_t c = 0; c < w; ++c) {
                           g[r * n + begin + c] += self.grad[r * w + c];
                         }
                       }
                     });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_rows");
  const std::size_t m = a.rows(), n = a.cols();
  if (begin >= end || end > m) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + to_string(a.shape()));
  }
  auto src = a.values();
  std::vector<Real> v(src.begin() + begin * n, src.begin() + end * n);
  return make_result({end - begin, n}, std::move(v), {TensorAccess::node(a)},
                     [n, begin](Node& self) {
                       auto& g = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         g[begin * n + i] += self.grad[i];
                       }
                     });
}

Tensor gather_rows(const std::vector<Tensor>& seq, std::size_t row) {
  if (seq.empty()) throw ShapeError("gather_rows: empty sequence");
  const std::size_t n = seq[0].cols();
  std::vector<Real> v;
  v.reserve(seq.size() * n);
  std::vector<NodePtr> parents;
  for (const auto& t : seq) {
    if (t.cols() != n || row >= t.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(row) + " unavailable in " +
                       to_string(t.shape()));
    }
    auto src = t.values();
    v.insert(v.end(), src.begin() + row * n, src.begin() + (row + 1) * n);
    parents.push_back(TensorAccess::node(t));
  }
  return make_result({seq.size(), n}, std::move(v), std::move(parents), [n, row](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node& p = *self.parents[k];
      if (!p.requires_grad) continue;
      auto& g = p.ensure_grad();
      for (std::size_t c = 0; c < n; ++c) g[row * n + c] += self.grad[k * n + c];
    }
  });
}

// ---------------------------------------------------------------------------
// Normalization and reductions

Tensor softmax_rows(const Tensor& a) {
  if (!a.defined()) throw ShapeError("softmax_rows: empty tensor");
  require_matrix(a, "softmax_rows");
  const std::size_t m = a.rows(), n = a.cols();
  auto src = a.values();
  std::vector<Real> v(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const Real* x = src.data() + r * n;
    Real* y = v.data() + r * n;
    const Real mx = *std::max_element(x, x + n);
    Real z = 0;
    for (std::size_t c = 0; c < n; ++c) z += (y[c] = std::exp(x[c] - mx));
    for (std::size_t c = 0; c < n; ++c) y[c] /= z;
  }
  return make_result({m, n}, std::move(v), {TensorAccess::node(a)}, [m, n](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < m; ++r) {
      const Real* y = self.value.data() + r * n;
      const Real* gy = self.grad.data() + r * n;
      Real dot = 0;
      for (std::size_t c = 0; c < n; ++c) dot += gy[c] * y[c];
      for (std::size_t c = 0; c < n; ++c) g[r * n + c] += y[c] * (gy[c] - dot);
    }
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  if (!a.defined()) throw ShapeError("log_softmax_rows: empty tensor");
  require_matrix(a, "log_softmax_rows");
  const std::size_t m = a.rows(), n = a.cols();
  auto src = a.values();
  std::vector<Real> v(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const Real* x = src.data() + r * n;
    const Real mx = *std::max_element(x, x + n);
    Real z = 0;
    for (std::size_t c = 0; c < n; ++c) z += std::exp(x[c] - mx);
    const Real lse = mx + std::log(z);
    for (std::size_t c = 0; c < n; ++c) v[r * n + c] = x[c] - lse;
  }
  return make_result({m, n}, std::move(v), {TensorAccess::node(a)}, [m, n](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < m; ++r) {
      const Real* y = self.value.data() + r * n;
      const Real* gy = self.grad.data() + r * n;
      Real total = 0;
      for (std::size_t c = 0; c < n; ++c) total += gy[c];
      for (std::size_t c = 0; c < n; ++c) g[r * n + c] += gy[c] - std::exp(y[c]) * total;
    }
  });
}

Tensor pick(const Tensor& a, std::size_t r, std::size_t c) {
  const Real x = a.at(r, c);
  const std::size_t idx = r * a.cols() + c;
  return make_result({1, 1}, {x}, {TensorAccess::node(a)}, [idx](Node& self) {
    self.parents[0]->ensure_grad()[idx] += self.grad[0];
  });
}

Tensor sum(const Tensor& a) {
  const Node& n = node_of(a, "sum");
  const Real total = std::accumulate(n.value.begin(), n.value.end(), Real{0});
  return make_result({1, 1}, {total}, {TensorAccess::node(a)}, [](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (auto& x : g) x += self.grad[0];
  });
}

Tensor add_n(const std::vector<Tensor>& terms) {
  if (terms.empty()) throw ShapeError("add_n: no inputs");
  const Shape& s = terms[0].shape();
  std::vector<Real> v(terms[0].size(), 0.0);
  std::vector<NodePtr> parents;
  for (const auto& t : terms) {
    if (t.shape() != s) {
      throw ShapeError("add_n: shapes differ, " + to_string(s) + " vs " + to_string(t.shape()));
    }
    auto src = t.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += src[i];
    parents.push_back(TensorAccess::node(t));
  }
  return make_result(s, std::move(v), std::move(parents), [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor dropout(const Tensor& a, Real p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error("dropout: rate must lie in [0, 1), got " + std::to_string(p));
  }
  node_of(a, "dropout");
  if (!training || p == 0.0) return a;
  const Real keep_scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution keep(1.0 - p);
  auto src = a.values();
  std::vector<Real> mask(src.size());
  std::vector<Real> v(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    mask[i] = keep(rng) ? keep_scale : 0.0;
    v[i] = src[i] * mask[i];
  }
  return make_result(a.shape(), std::move(v), {TensorAccess::node(a)},
                     [mask = std::move(mask)](Node& self) {
                       auto& g = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
                     });
}

// ---------------------------------------------------------------------------
// Reverse pass

void backward(const Tensor& loss) {
  const NodePtr& root = TensorAccess::node(loss);
  if (!root) throw Error("backward: undefined loss");
  if (root->value.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + to_string(root->shape));
  }
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) {
      n->ensure_grad();
      n->backward(*n);
    }
  }
  // Release the recorded graph. Edges are collected first so no node in
  // `order` dies while it is still being visited.
  std::vector<NodePtr> released;
  for (Node* n : order) {
    for (auto& p : n->parents) released.push_back(std::move(p));
    n->parents.clear();
    n->backward = nullptr;
  }
}

}  // namespace dkg
