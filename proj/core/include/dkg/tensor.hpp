#pragma once

// Dense row-major tensors with tape-free reverse-mode differentiation.
//
// Every op returns a new Tensor. When gradient recording is enabled and any
// input requires a gradient, the result keeps references to its inputs plus
// a closure that propagates the output gradient back to them. backward()
// walks that graph in reverse topological order and then releases it, so a
// graph lives for exactly one forward/backward pass.
//
// All ops work on rank-2 tensors; a vector is a 1 x n row.

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dkg {

using Real = double;
using Shape = std::vector<std::size_t>;
using Rng = std::mt19937_64;

std::string to_string(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, Real value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<Real> values, bool requires_grad = false);
  static Tensor scalar(Real value);
  static Tensor row(std::vector<Real> values);

  bool defined() const { return node_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Real> values() const;
  std::span<Real> mutable_values();
  Real item() const;
  Real at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  // Allocates (or resets) the gradient buffer to zeros.
  void zero_grad();
  void clear_grad();

  // Copy of the values as a fresh leaf outside any graph.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  friend struct TensorAccess;
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise with broadcasting: each extent must match or be 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, Real factor);
Tensor add_scalar(const Tensor& a, Real offset);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
// Stacks row `row` of every tensor in `seq` into a seq.size() x cols matrix.
Tensor gather_rows(const std::vector<Tensor>& seq, std::size_t row);

Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);

// 1 x 1 tensor holding a(r, c).
Tensor pick(const Tensor& a, std::size_t r, std::size_t c);
Tensor sum(const Tensor& a);
// Sum of equally shaped tensors.
Tensor add_n(const std::vector<Tensor>& terms);

// Inverted dropout: identity when !training, otherwise survivors are scaled
// by 1 / (1 - p).
Tensor dropout(const Tensor& a, Real p, bool training, Rng& rng);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }

// Populates gradients of every requires_grad tensor reachable from `loss`,
// which must hold a single element, then frees the recorded graph.
void backward(const Tensor& loss);

}  // namespace dkg
