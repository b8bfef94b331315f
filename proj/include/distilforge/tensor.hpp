// SPDX-License-Identifier: Apache-2.0
//
// Dense float64 tensors with a reverse-mode gradient tape.
//
// A Tensor is a shared handle onto a graph node. Operations on tensors that
// require gradients record their inputs and a backward rule; `backward()` on a
// scalar result orders the reachable nodes topologically (the Tape) and runs
// the rules once each in reverse. Only tensor-scalar broadcasting is supported.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace distilforge {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Thrown when shapes or ranks do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation would produce NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::optional<std::vector<double>> grad;
  std::string op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
};

}  // namespace detail

class Tensor {
 public:
  /// Scalar zero constant.
  Tensor();

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Row-major matrix from nested rows.
  static Tensor matrix(const std::vector<std::vector<double>>& rows, bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->data; }
  /// Raw access for optimizers and finite-difference probes. Does not
  /// invalidate recorded graphs; callers rebuild them after mutating.
  std::span<double> mutable_data() { return node_->data; }

  double item() const;
  double at(std::size_t i) const { return node_->data.at(i); }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const { return node_->requires_grad; }
  /// Only valid on leaves. Enabling allocates a zero gradient buffer.
  void set_requires_grad(bool on);

  bool has_grad() const { return node_->grad.has_value(); }
  /// Gradient buffer; throws if this tensor never received one.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  bool is_leaf() const { return node_->is_leaf(); }
  const std::string& op() const { return node_->op; }

  /// Same data, cut from the graph, no gradient.
  Tensor detach() const;
  /// Deep copy of data into a new leaf.
  Tensor clone(bool requires_grad = false) const;

  /// Populates gradients of every reachable tensor that requires them.
  /// Requires a single-element tensor.
  void backward() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Topologically ordered view of the graph feeding a root tensor. Only nodes
/// that require gradients are recorded.
class Tape {
 public:
  struct Record {
    std::string op;
    std::vector<std::size_t> inputs;  // indices into records()
    std::size_t output = 0;
  };

  explicit Tape(const Tensor& root);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds the root gradient with one and applies every backward rule once,
  /// last node first. Leaf gradients accumulate; interior ones are reset.
  void backward();

 private:
  std::vector<std::shared_ptr<detail::Node>> nodes_;
  std::vector<Record> records_;
};

/// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool grad_enabled();

 private:
  bool previous_;
};

// ---- elementwise -----------------------------------------------------------

enum class ElementwiseOp { add, sub, mul, div };

/// `b` must match `a`'s shape or hold a single element (broadcast scalar).
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);
Tensor elementwise(ElementwiseOp op, const Tensor& a, double b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator+(const Tensor& a, double b) { return elementwise(ElementwiseOp::add, a, b); }
inline Tensor operator-(const Tensor& a, double b) { return elementwise(ElementwiseOp::sub, a, b); }
inline Tensor operator*(const Tensor& a, double b) { return elementwise(ElementwiseOp::mul, a, b); }
inline Tensor operator/(const Tensor& a, double b) { return elementwise(ElementwiseOp::div, a, b); }
Tensor operator-(const Tensor& a);

Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
/// Natural log; entries must be positive.
Tensor log(const Tensor& x);

/// Elementwise Huber: 0.5 r^2 for |r| <= 1, |r| - 0.5 otherwise, r = a - b.
Tensor huber(const Tensor& a, const Tensor& b);

// ---- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// x[n x m] + bias[m] added to every row.
Tensor add_row_vector(const Tensor& x, const Tensor& bias);

// ---- reductions ------------------------------------------------------------

enum class ReduceKind { sum, mean };

/// Full reduction to a scalar when `axis` is empty; otherwise collapses one
/// axis of a matrix. Summation runs left to right in row-major order.
Tensor reduce(ReduceKind kind, const Tensor& x, std::optional<std::size_t> axis = std::nullopt);
inline Tensor sum(const Tensor& x) { return reduce(ReduceKind::sum, x); }
inline Tensor mean(const Tensor& x) { return reduce(ReduceKind::mean, x); }

// ---- softmax family --------------------------------------------------------

/// Row-wise softmax of z / t, max-subtracted.
Tensor softmax_with_temperature(const Tensor& z, double t);
/// Row-wise log-softmax of z / t.
Tensor log_softmax_with_temperature(const Tensor& z, double t);

// ---- relational primitives -------------------------------------------------

/// Coincident rows closer than this get distance zero and no gradient.
inline constexpr double kCoincidentDistance = 1e-8;

/// Euclidean distances between all row pairs of e[n x d], n >= 2.
Tensor pairwise_l2(const Tensor& e);

using Triple = std::array<std::size_t, 3>;

struct AngleCosines {
  Tensor values;             // one cosine per triple; zero where invalid
  std::vector<char> valid;   // 0 when the triple has a coincident pair
};

/// cos of the angle at e[v] between e[u] - e[v] and e[w] - e[v] for each
/// (u, v, w). Triples with a coincident pair are marked invalid.
AngleCosines angle_cosines(const Tensor& e, std::span<const Triple> triples);

}  // namespace distilforge
