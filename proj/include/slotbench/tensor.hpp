#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "slotbench/common.hpp"

namespace slotbench {

// Dense row-major tensor of doubles. Rank is arbitrary but nearly all math
// in this project runs on rank-1/rank-2 views; images and conv activations
// use rank-3 (C, H, W).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), 0.0);
  }
  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = v;
    return t;
  }
  static Tensor from(std::vector<int> shape, std::vector<double> values) {
    Tensor t;
    t.shape_ = std::move(shape);
    if (values.size() != numel_of(t.shape_))
      throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape");
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  int rows() const { return dim(0); }
  int cols() const { return dim(1); }
  int dim(int i) const {
    if (i < 0 || i >= rank()) throw ShapeError("dim index " + std::to_string(i) + " out of rank " + std::to_string(rank()));
    return shape_[static_cast<std::size_t>(i)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }

  // Reinterpret the flat buffer under a new shape of equal element count.
  Tensor reshaped(std::vector<int> shape) const {
    if (numel_of(shape) != size()) throw ShapeError("reshape element count mismatch");
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
  }

  void fill(double v) {
    for (auto& x : data_) x = v;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "(";
    for (int i = 0; i < rank(); ++i) s += (i ? "," : "") + std::to_string(shape_[static_cast<std::size_t>(i)]);
    return s + ")";
  }

  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeError("negative dimension");
      n *= static_cast<std::size_t>(d);
    }
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// ---- matmul kernels ------------------------------------------------------
// ikj ordering with a contiguous inner loop; gcc vectorizes these to FMA.
// C must not alias A or B. All are accumulate-into-zeroed-C.

inline void matmul_nn(Tensor& c, const Tensor& a, const Tensor& b) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw ShapeError("matmul inner dims " + std::to_string(k) + " vs " + std::to_string(b.rows()));
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    double* ci = pc + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = pa + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = ai[kk];
      const double* bk = pb + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
}

// C(m,n) = A(m,k) * B(n,k)^T
inline void matmul_nt(Tensor& c, const Tensor& a, const Tensor& b) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) throw ShapeError("matmul_nt inner dims " + std::to_string(k) + " vs " + std::to_string(b.cols()));
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* ai = pa + static_cast<std::size_t>(i) * k;
    double* ci = pc + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = pb + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
      ci[j] = acc;
    }
  }
}

// C(m,n) = A(k,m)^T * B(k,n)
inline void matmul_tn(Tensor& c, const Tensor& a, const Tensor& b) {
  const int k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k) throw ShapeError("matmul_tn inner dims " + std::to_string(k) + " vs " + std::to_string(b.rows()));
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < static_cast<std::size_t>(m) * n; ++i) pc[i] = 0.0;
  for (int kk = 0; kk < k; ++kk) {
    const double* ak = pa + static_cast<std::size_t>(kk) * m;
    const double* bk = pb + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double av = ak[i];
      double* ci = pc + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.rows(), b.cols()});
  matmul_nn(c, a, b);
  return c;
}

// Round every entry to the nearest float32; parameters live on the float32
// grid so checkpoints (which store float32) round-trip bitwise.
inline void quantize_f32(Tensor& t) {
  double* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) p[i] = static_cast<double>(static_cast<float>(p[i]));
}

}  // namespace slotbench
