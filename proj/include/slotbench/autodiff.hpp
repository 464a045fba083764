#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "slotbench/tensor.hpp"

namespace slotbench {
namespace ad {

// Reverse-mode autodiff over Tensor. Each op returns a Var that records its
// parents and a closure accumulating into their grads. backward() runs the
// closures in reverse topological order. All accumulation orders are fixed,
// so repeated runs are bitwise identical.

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily in backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // pulls from this->grad into parents' grads
  bool grad_ready = false;

  void ensure_grad() {
    if (!grad_ready) {
      grad = Tensor::zeros(value.shape());
      grad_ready = true;
    }
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Var constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = false;
    return Var(std::move(n));
  }

  static Var leaf(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = true;
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& value_mut() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  std::shared_ptr<Node> node() const { return node_; }

  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }

 private:
  std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from `loss` (must be a single element).
// Grads of all reachable requires_grad nodes are populated.
void backward(const Var& loss);

// Zero the gradient of a leaf before reuse across steps.
inline void zero_grad(const Var& v) {
  if (v.node()->grad_ready) v.node()->grad.fill(0.0);
}

// ---- graph construction ops ----------------------------------------------

Var matmul(const Var& a, const Var& b);

// Elementwise binary ops with broadcasting over (m,n)º(m,n), (m,n)º(m,1),
// (m,n)º(1,n), (m,n)º(1,1) and the mirrored forms.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var scale(const Var& a, double c);
Var add_const(const Var& a, double c);

Var relu(const Var& a);
Var tanh_(const Var& a);
Var sigmoid(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var sqrt_(const Var& a);
Var square(const Var& a);

// Softmax along rows (each row sums to 1) or columns (each column sums to 1)
// of a rank-2 tensor; max-shifted for stability.
Var softmax_rows(const Var& a);
Var softmax_cols(const Var& a);

// Row-wise layer normalization over the last dimension with affine params
// gamma/beta of shape (1, D) and variance epsilon.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

Var sum_all(const Var& a);    // -> (1,1)
Var mean_all(const Var& a);   // -> (1,1)
Var row_sum(const Var& a);    // (m,n) -> (m,1)
Var mean_rows(const Var& a);  // (m,n) -> (1,n)

Var transpose(const Var& a);
Var reshape(const Var& a, std::vector<int> shape);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, int r0, int r1);
Var slice_cols(const Var& a, int c0, int c1);

// Gather rows by index (embedding lookup); gradient scatters back.
Var select_rows(const Var& a, const std::vector<int>& idx);

// Broadcast one row (1,n) to (m,n).
Var repeat_row(const Var& a, int m);

// Value copy that blocks gradient flow.
Var detach(const Var& a);

// im2col for a (C,H,W) input with square kernel / stride / zero padding,
// producing (out_h*out_w, C*k*k); backward scatter-adds (col2im).
Var im2col(const Var& x, int kernel, int stride, int pad);

Var mse(const Var& a, const Var& b);  // mean squared error over all entries

}  // namespace ad
}  // namespace slotbench
