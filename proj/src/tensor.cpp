// SPDX-License-Identifier: Apache-2.0
#include "distilforge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "distilforge/kernels.hpp"

namespace distilforge {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

thread_local bool g_grad_enabled = true;

constexpr double kMinDivisor = 1e-12;

void check_finite(const std::vector<double>& data, const std::string& op) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      std::ostringstream msg;
      msg << op << ": non-finite value at index " << i;
      throw NonFiniteError(msg.str());
    }
  }
}

std::vector<double>& grad_of(Node& n) {
  if (!n.grad) n.grad.emplace(n.data.size(), 0.0);
  return *n.grad;
}

// Builds the output node. Inputs and the backward rule are kept only when
// recording is on and at least one input requires a gradient.
Tensor make_result(std::string op, Shape shape, std::vector<double> data,
                   std::vector<NodePtr> inputs, std::function<void(Node&)> backward) {
  check_finite(data, op);
  auto out = std::make_shared<Node>();
  out->shape = std::move(shape);
  out->data = std::move(data);
  out->op = std::move(op);
  const bool track =
      g_grad_enabled &&
      std::any_of(inputs.begin(), inputs.end(), [](const NodePtr& n) { return n->requires_grad; });
  if (track) {
    out->requires_grad = true;
    out->inputs = std::move(inputs);
    out->backward = std::move(backward);
  }
  return Tensor(std::move(out));
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " +
                     shape_string(t.shape()));
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor() : node_(std::make_shared<Node>()) {
  node_->data = {0.0};
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw ShapeError("shape " + shape_string(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  check_finite(data, "from");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  Tensor t(std::move(node));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows, bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.front().size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return from({r, c}, std::move(data), requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows(): not a matrix " + shape_string(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols(): not a matrix " + shape_string(shape()));
  return shape()[1];
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item(): tensor has " + std::to_string(numel()) + " values");
  return node_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return node_->data.at(r * cols() + c);
}

void Tensor::set_requires_grad(bool on) {
  if (!is_leaf()) throw std::logic_error("set_requires_grad on a non-leaf tensor");
  node_->requires_grad = on;
  if (on) {
    if (!node_->grad) node_->grad.emplace(numel(), 0.0);
  } else {
    node_->grad.reset();
  }
}

std::span<const double> Tensor::grad() const {
  if (!node_->grad) throw std::logic_error("tensor has no gradient");
  return *node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_->grad) throw std::logic_error("tensor has no gradient");
  return *node_->grad;
}

void Tensor::zero_grad() {
  if (node_->grad) std::fill(node_->grad->begin(), node_->grad->end(), 0.0);
}

Tensor Tensor::detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->data = node_->data;
  return Tensor(std::move(node));
}

Tensor Tensor::clone(bool requires_grad) const {
  return from(node_->shape, node_->data, requires_grad);
}

void Tensor::backward() const {
  if (numel() != 1)
    throw ShapeError("backward(): loss must be scalar, got shape " + shape_string(shape()));
  if (!requires_grad()) return;
  Tape tape(*this);
  tape.backward();
}

// ---- Tape ------------------------------------------------------------------

Tape::Tape(const Tensor& root) {
  std::unordered_map<const Node*, std::size_t> index;
  if (!root.requires_grad()) return;

  // Iterative post-order DFS; inputs are visited in argument order.
  struct Frame {
    NodePtr node;
    std::size_t next = 0;
  };
  std::unordered_map<const Node*, bool> on_stack;
  std::vector<Frame> stack{{root.node(), 0}};
  on_stack[root.node().get()] = true;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.node->inputs.size()) {
      NodePtr child = top.node->inputs[top.next++];
      if (!child->requires_grad) continue;
      if (index.count(child.get()) || on_stack[child.get()]) continue;
      on_stack[child.get()] = true;
      stack.push_back({std::move(child), 0});
      continue;
    }
    NodePtr done = std::move(top.node);
    stack.pop_back();
    Record rec;
    rec.op = done->op;
    for (const NodePtr& in : done->inputs)
      if (in->requires_grad) rec.inputs.push_back(index.at(in.get()));
    rec.output = nodes_.size();
    index[done.get()] = nodes_.size();
    records_.push_back(std::move(rec));
    nodes_.push_back(std::move(done));
  }
}

void Tape::backward() {
  if (nodes_.empty()) return;
  for (auto& n : nodes_)
    if (!n->is_leaf()) n->grad.emplace(n->data.size(), 0.0);
  Node& root = *nodes_.back();
  grad_of(root)[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (!n.is_leaf()) n.backward(n);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool NoGradGuard::grad_enabled() { return g_grad_enabled; }

// ---- elementwise -----------------------------------------------------------

namespace {

const char* op_name(ElementwiseOp op) {
  switch (op) {
    case ElementwiseOp::add: return "add";
    case ElementwiseOp::sub: return "sub";
    case ElementwiseOp::mul: return "mul";
    case ElementwiseOp::div: return "div";
  }
  return "?";
}

double apply(ElementwiseOp op, double x, double y) {
  switch (op) {
    case ElementwiseOp::add: return x + y;
    case ElementwiseOp::sub: return x - y;
    case ElementwiseOp::mul: return x * y;
    case ElementwiseOp::div: return x / y;
  }
  return 0.0;
}

}  // namespace

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
  const bool scalar_b = b.numel() == 1 && a.shape() != b.shape();
  if (!scalar_b && a.shape() != b.shape())
    throw ShapeError(std::string(op_name(op)) + ": shape mismatch " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  const auto ad = a.data();
  const auto bd = b.data();
  if (op == ElementwiseOp::div) {
    for (double v : bd)
      if (std::abs(v) < kMinDivisor) throw std::domain_error("div: divisor magnitude below 1e-12");
  }
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < ad.size(); ++i) out[i] = apply(op, ad[i], bd[scalar_b ? 0 : i]);

  return make_result(op_name(op), a.shape(), std::move(out), {a.node(), b.node()},
                     [op, scalar_b](Node& self) {
                       Node& na = *self.inputs[0];
                       Node& nb = *self.inputs[1];
                       const auto& g = *self.grad;
                       const std::size_t n = g.size();
                       auto bidx = [&](std::size_t i) { return scalar_b ? 0 : i; };
                       if (na.requires_grad) {
                         auto& ga = grad_of(na);
                         for (std::size_t i = 0; i < n; ++i) {
                           switch (op) {
                             case ElementwiseOp::add:
                             case ElementwiseOp::sub: ga[i] += g[i]; break;
                             case ElementwiseOp::mul: ga[i] += g[i] * nb.data[bidx(i)]; break;
                             case ElementwiseOp::div: ga[i] += g[i] / nb.data[bidx(i)]; break;
                           }
                         }
                       }
                       if (nb.requires_grad) {
                         auto& gb = grad_of(nb);
                         for (std::size_t i = 0; i < n; ++i) {
                           const std::size_t j = bidx(i);
                           switch (op) {
                             case ElementwiseOp::add: gb[j] += g[i]; break;
                             case ElementwiseOp::sub: gb[j] -= g[i]; break;
                             case ElementwiseOp::mul: gb[j] += g[i] * na.data[i]; break;
                             case ElementwiseOp::div: {
                               const double bv = nb.data[j];
                               gb[j] -= g[i] * na.data[i] / (bv * bv);
                               break;
                             }
                           }
                         }
                       }
                     });
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, double b) {
  return elementwise(op, a, Tensor::scalar(b));
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::mul, a, b); }
Tensor div(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseOp::div, a, b); }

Tensor operator-(const Tensor& a) { return elementwise(ElementwiseOp::mul, a, -1.0); }

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  return make_result("relu", x.shape(), std::move(out), {x.node()}, [](Node& self) {
    Node& in = *self.inputs[0];
    auto& gi = grad_of(in);
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.data[i] > 0.0) gi[i] += g[i];
  });
}

Tensor exp(const Tensor& x) {
  std::vector<double> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(xd[i]);
  return make_result("exp", x.shape(), std::move(out), {x.node()}, [](Node& self) {
    auto& gi = grad_of(*self.inputs[0]);
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * self.data[i];
  });
}

Tensor log(const Tensor& x) {
  std::vector<double> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(xd[i] > 0.0)) throw std::domain_error("log: non-positive argument");
    out[i] = std::log(xd[i]);
  }
  return make_result("log", x.shape(), std::move(out), {x.node()}, [](Node& self) {
    Node& in = *self.inputs[0];
    auto& gi = grad_of(in);
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] / in.data[i];
  });
}

Tensor huber(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("huber: shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = std::abs(ad[i] - bd[i]);
    out[i] = r <= 1.0 ? 0.5 * r * r : r - 0.5;
  }
  return make_result("huber", a.shape(), std::move(out), {a.node(), b.node()}, [](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = std::clamp(na.data[i] - nb.data[i], -1.0, 1.0);
      if (na.requires_grad) grad_of(na)[i] += g[i] * r;
      if (nb.requires_grad) grad_of(nb)[i] -= g[i] * r;
    }
  });
}

// ---- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  std::vector<double> out(m * n);
  kernels::matmul(a.data(), b.data(), out, m, k, n);
  return make_result("matmul", {m, n}, std::move(out), {a.node(), b.node()},
                     [m, k, n](Node& self) {
                       Node& na = *self.inputs[0];
                       Node& nb = *self.inputs[1];
                       const auto& g = *self.grad;
                       if (na.requires_grad) {
                         std::vector<double> tmp(m * k);
                         kernels::matmul_a_bt(g, nb.data, tmp, m, k, n);
                         auto& ga = grad_of(na);
                         for (std::size_t i = 0; i < tmp.size(); ++i) ga[i] += tmp[i];
                       }
                       if (nb.requires_grad) {
                         std::vector<double> tmp(k * n);
                         kernels::matmul_at_b(na.data, g, tmp, m, k, n);
                         auto& gb = grad_of(nb);
                         for (std::size_t i = 0; i < tmp.size(); ++i) gb[i] += tmp[i];
                       }
                     });
}

Tensor add_row_vector(const Tensor& x, const Tensor& bias) {
  require_rank2(x, "add_row_vector");
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.numel() != c)
    throw ShapeError("add_row_vector: bias has " + std::to_string(bias.numel()) +
                     " values for " + std::to_string(c) + " columns");
  const auto xd = x.data();
  const auto bd = bias.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = xd[i * c + j] + bd[j];
  return make_result("add_row_vector", x.shape(), std::move(out), {x.node(), bias.node()},
                     [r, c](Node& self) {
                       Node& nx = *self.inputs[0];
                       Node& nb = *self.inputs[1];
                       const auto& g = *self.grad;
                       if (nx.requires_grad) {
                         auto& gx = grad_of(nx);
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                       }
                       if (nb.requires_grad) {
                         auto& gb = grad_of(nb);
                         for (std::size_t i = 0; i < r; ++i)
                           for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
                       }
                     });
}

// ---- reductions ------------------------------------------------------------

Tensor reduce(ReduceKind kind, const Tensor& x, std::optional<std::size_t> axis) {
  const auto xd = x.data();
  const char* name = kind == ReduceKind::sum ? "sum" : "mean";
  if (!axis) {
    double acc = 0.0;
    for (double v : xd) acc += v;
    const double scale = kind == ReduceKind::mean ? 1.0 / static_cast<double>(xd.size()) : 1.0;
    if (kind == ReduceKind::mean) acc /= static_cast<double>(xd.size());
    return make_result(name, {}, {acc}, {x.node()}, [scale](Node& self) {
      auto& gi = grad_of(*self.inputs[0]);
      const double g = (*self.grad)[0] * scale;
      for (double& v : gi) v += g;
    });
  }
  require_rank2(x, name);
  if (*axis > 1) throw ShapeError(std::string(name) + ": invalid axis " + std::to_string(*axis));
  const std::size_t r = x.rows(), c = x.cols();
  const bool rows_axis = *axis == 0;
  const std::size_t out_n = rows_axis ? c : r;
  const std::size_t count = rows_axis ? r : c;
  std::vector<double> out(out_n, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[rows_axis ? j : i] += xd[i * c + j];
  const double scale = kind == ReduceKind::mean ? 1.0 / static_cast<double>(count) : 1.0;
  if (kind == ReduceKind::mean)
    for (double& v : out) v /= static_cast<double>(count);
  return make_result(name, {out_n}, std::move(out), {x.node()},
                     [r, c, rows_axis, scale](Node& self) {
                       auto& gi = grad_of(*self.inputs[0]);
                       const auto& g = *self.grad;
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < c; ++j)
                           gi[i * c + j] += g[rows_axis ? j : i] * scale;
                     });
}

// ---- softmax family --------------------------------------------------------

namespace {

void check_temperature(double t, const char* op) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::domain_error(std::string(op) + ": temperature must be positive");
}

}  // namespace

Tensor softmax_with_temperature(const Tensor& z, double t) {
  check_temperature(t, "softmax");
  require_rank2(z, "softmax");
  const std::size_t r = z.rows(), c = z.cols();
  const auto zd = z.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = zd.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp((row[j] - mx) / t);
      denom += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= denom;
  }
  return make_result("softmax", z.shape(), std::move(out), {z.node()}, [r, c, t](Node& self) {
    auto& gz = grad_of(*self.inputs[0]);
    const auto& g = *self.grad;
    const auto& y = self.data;
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        gz[i * c + j] += y[i * c + j] * (g[i * c + j] - dot) / t;
    }
  });
}

Tensor log_softmax_with_temperature(const Tensor& z, double t) {
  check_temperature(t, "log_softmax");
  require_rank2(z, "log_softmax");
  const std::size_t r = z.rows(), c = z.cols();
  const auto zd = z.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = zd.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp((row[j] - mx) / t);
    const double lse = std::log(denom);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (row[j] - mx) / t - lse;
  }
  return make_result("log_softmax", z.shape(), std::move(out), {z.node()},
                     [r, c, t](Node& self) {
                       auto& gz = grad_of(*self.inputs[0]);
                       const auto& g = *self.grad;
                       const auto& y = self.data;
                       for (std::size_t i = 0; i < r; ++i) {
                         double gsum = 0.0;
                         for (std::size_t j = 0; j < c; ++j) gsum += g[i * c + j];
                         for (std::size_t j = 0; j < c; ++j)
                           gz[i * c + j] += (g[i * c + j] - std::exp(y[i * c + j]) * gsum) / t;
                       }
                     });
}

// ---- relational primitives -------------------------------------------------

Tensor pairwise_l2(const Tensor& e) {
  require_rank2(e, "pairwise_l2");
  const std::size_t n = e.rows(), d = e.cols();
  if (n < 2) throw ShapeError("pairwise_l2: need at least 2 rows");
  std::vector<double> out(n * n);
  kernels::pairwise_l2(e.data(), out, n, d);
  for (double& v : out)
    if (v < kCoincidentDistance) v = 0.0;
  return make_result("pairwise_l2", {n, n}, std::move(out), {e.node()}, [n, d](Node& self) {
    Node& ne = *self.inputs[0];
    auto& ge = grad_of(ne);
    const auto& g = *self.grad;
    const auto& dist = self.data;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const double duv = dist[u * n + v];
        if (u == v || duv == 0.0) continue;
        const double coeff = (g[u * n + v] + g[v * n + u]) / duv;
        for (std::size_t c = 0; c < d; ++c)
          ge[u * d + c] += coeff * (ne.data[u * d + c] - ne.data[v * d + c]);
      }
    }
  });
}

AngleCosines angle_cosines(const Tensor& e, std::span<const Triple> triples) {
  require_rank2(e, "angle_cosines");
  const std::size_t n = e.rows(), d = e.cols();
  if (n < 3) throw ShapeError("angle_cosines: need at least 3 rows");
  for (const Triple& t : triples) {
    if (t[0] >= n || t[1] >= n || t[2] >= n)
      throw std::out_of_range("angle_cosines: triple index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::invalid_argument("angle_cosines: triple repeats an index");
  }
  const std::size_t count = triples.size();
  std::vector<double> out(count);
  std::vector<char> valid(count);
  kernels::angle_cosines(e.data(), d, triples, kCoincidentDistance, out, valid);

  std::vector<Triple> saved(triples.begin(), triples.end());
  std::vector<char> saved_valid = valid;
  Tensor values = make_result(
      "angle_cosines", {count}, std::move(out), {e.node()},
      [d, saved = std::move(saved), saved_valid = std::move(saved_valid)](Node& self) {
        Node& ne = *self.inputs[0];
        auto& ge = grad_of(ne);
        const auto& g = *self.grad;
        std::vector<double> a(d), b(d);
        for (std::size_t i = 0; i < saved.size(); ++i) {
          if (!saved_valid[i] || g[i] == 0.0) continue;
          const auto [u, v, w] = saved[i];
          double na = 0.0, nb = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            a[c] = ne.data[u * d + c] - ne.data[v * d + c];
            b[c] = ne.data[w * d + c] - ne.data[v * d + c];
            na += a[c] * a[c];
            nb += b[c] * b[c];
          }
          na = std::sqrt(na);
          nb = std::sqrt(nb);
          const double cosv = self.data[i];
          for (std::size_t c = 0; c < d; ++c) {
            const double da = g[i] * (b[c] / (na * nb) - cosv * a[c] / (na * na));
            const double db = g[i] * (a[c] / (na * nb) - cosv * b[c] / (nb * nb));
            ge[u * d + c] += da;
            ge[w * d + c] += db;
            ge[v * d + c] -= da + db;
          }
        }
      });
  return {std::move(values), std::move(valid)};
}

}  // namespace distilforge
