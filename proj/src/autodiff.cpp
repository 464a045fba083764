#include "slotbench/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace slotbench {
namespace ad {

namespace {

std::shared_ptr<Node> make_node(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                                std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool need = false;
  for (const auto& p : parents) need = need || p->requires_grad;
  n->requires_grad = need;
  if (need) {
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return n;
}

void check_rank2(const Var& v, const char* what) {
  if (v.value().rank() != 2) throw ShapeError(std::string(what) + " expects rank-2, got " + v.value().shape_str());
}

enum class Bcast { same, col, row, scalar };  // shape of the smaller operand

Bcast broadcast_kind(const Tensor& big, const Tensor& small) {
  if (big.same_shape(small)) return Bcast::same;
  if (big.rank() != 2 || small.rank() != 2)
    throw ShapeError("broadcast needs rank-2 operands, got " + big.shape_str() + " and " + small.shape_str());
  if (small.rows() == 1 && small.cols() == 1) return Bcast::scalar;
  if (small.rows() == big.rows() && small.cols() == 1) return Bcast::col;
  if (small.rows() == 1 && small.cols() == big.cols()) return Bcast::row;
  throw ShapeError("incompatible broadcast " + big.shape_str() + " vs " + small.shape_str());
}

// Reduce a full-shape gradient onto a broadcast operand's shape.
void reduce_into(Tensor& dst, const Tensor& g, Bcast kind, int m, int n) {
  const double* pg = g.data();
  double* pd = dst.data();
  switch (kind) {
    case Bcast::same:
      for (std::size_t i = 0; i < g.size(); ++i) pd[i] += pg[i];
      break;
    case Bcast::scalar: {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += pg[i];
      pd[0] += acc;
      break;
    }
    case Bcast::col:
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        const double* row = pg + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += row[j];
        pd[i] += acc;
      }
      break;
    case Bcast::row:
      for (int i = 0; i < m; ++i) {
        const double* row = pg + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) pd[j] += row[j];
      }
      break;
  }
}

double fetch(const Tensor& t, Bcast kind, int i, int j, int n) {
  switch (kind) {
    case Bcast::same: return t.data()[static_cast<std::size_t>(i) * n + j];
    case Bcast::scalar: return t.data()[0];
    case Bcast::col: return t.data()[i];
    case Bcast::row: return t.data()[j];
  }
  return 0.0;
}

template <typename FwdFn, typename BwdFn>
Var binary_op(const Var& a, const Var& b, FwdFn fwd, BwdFn bwd) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  const bool a_big = ta.size() >= tb.size();
  const Tensor& big = a_big ? ta : tb;
  const Tensor& small = a_big ? tb : ta;
  const Bcast kind = broadcast_kind(big, small);
  const int m = big.rank() == 2 ? big.rows() : 1;
  const int n = big.rank() == 2 ? big.cols() : static_cast<int>(big.size());

  Tensor out(big.shape());
  double* po = out.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t off = static_cast<std::size_t>(i) * n + j;
      const double av = a_big ? big.data()[off] : fetch(small, kind, i, j, n);
      const double bv = a_big ? fetch(small, kind, i, j, n) : big.data()[off];
      po[off] = fwd(av, bv);
    }

  auto an = a.node();
  auto bn = b.node();
  return Var(make_node(std::move(out), {an, bn}, [an, bn, a_big, kind, m, n, bwd](Node& self) {
    const Tensor& g = self.grad;
    const Tensor& ta2 = an->value;
    const Tensor& tb2 = bn->value;
    Tensor ga, gb;
    const bool need_a = an->requires_grad;
    const bool need_b = bn->requires_grad;
    if (need_a) ga = Tensor::zeros(self.value.shape());
    if (need_b) gb = Tensor::zeros(self.value.shape());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t off = static_cast<std::size_t>(i) * n + j;
        const double av = a_big ? ta2.data()[off] : fetch(ta2, kind, i, j, n);
        const double bv = a_big ? fetch(tb2, kind, i, j, n) : tb2.data()[off];
        double da, db;
        bwd(av, bv, g.data()[off], da, db);
        if (need_a) ga.data()[off] = da;
        if (need_b) gb.data()[off] = db;
      }
    if (need_a) {
      an->ensure_grad();
      reduce_into(an->grad, ga, a_big ? Bcast::same : kind, m, n);
    }
    if (need_b) {
      bn->ensure_grad();
      reduce_into(bn->grad, gb, a_big ? kind : Bcast::same, m, n);
    }
  }));
}

template <typename FwdFn, typename BwdFn>
Var unary_op(const Var& a, FwdFn fwd, BwdFn bwd) {
  const Tensor& ta = a.value();
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out.data()[i] = fwd(ta.data()[i]);
  auto an = a.node();
  auto on = make_node(std::move(out), {an}, [an, bwd](Node& self) {
    an->ensure_grad();
    const double* pv = an->value.data();
    const double* py = self.value.data();
    const double* pg = self.grad.data();
    double* pd = an->grad.data();
    for (std::size_t i = 0; i < self.value.size(); ++i) pd[i] += bwd(pv[i], py[i]) * pg[i];
  });
  return Var(std::move(on));
}

}  // namespace

void backward(const Var& loss) {
  if (loss.value().size() != 1) throw ShapeError("backward expects a scalar loss, got " + loss.value().shape_str());
  // Iterative DFS topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad();
  loss.node()->grad.data()[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad_ready) n->backprop(*n);
  }
}

Var matmul(const Var& a, const Var& b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  Tensor out({a.rows(), b.cols()});
  matmul_nn(out, a.value(), b.value());
  auto an = a.node();
  auto bn = b.node();
  return Var(make_node(std::move(out), {an, bn}, [an, bn](Node& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      Tensor ga({an->value.rows(), an->value.cols()});
      matmul_nt(ga, self.grad, bn->value);
      for (std::size_t i = 0; i < ga.size(); ++i) an->grad.data()[i] += ga.data()[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      Tensor gb({bn->value.rows(), bn->value.cols()});
      matmul_tn(gb, an->value, self.grad);
      for (std::size_t i = 0; i < gb.size(); ++i) bn->grad.data()[i] += gb.data()[i];
    }
  }));
}

Var add(const Var& a, const Var& b) {
  return binary_op(
      a, b, [](double x, double y) { return x + y; },
      [](double, double, double g, double& da, double& db) {
        da = g;
        db = g;
      });
}

Var sub(const Var& a, const Var& b) {
  return binary_op(
      a, b, [](double x, double y) { return x - y; },
      [](double, double, double g, double& da, double& db) {
        da = g;
        db = -g;
      });
}

Var mul(const Var& a, const Var& b) {
  return binary_op(
      a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double g, double& da, double& db) {
        da = g * y;
        db = g * x;
      });
}

Var div(const Var& a, const Var& b) {
  return binary_op(
      a, b, [](double x, double y) { return x / y; },
      [](double x, double y, double g, double& da, double& db) {
        da = g / y;
        db = -g * x / (y * y);
      });
}

Var scale(const Var& a, double c) {
  return unary_op(
      a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Var add_const(const Var& a, double c) {
  return unary_op(
      a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var relu(const Var& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

Var exp_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Var square(const Var& a) {
  return unary_op(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

namespace {

// axis: 0 -> softmax down each column, 1 -> along each row.
Var softmax_axis(const Var& a, int axis) {
  check_rank2(a, "softmax");
  const Tensor& t = a.value();
  const int m = t.rows(), n = t.cols();
  Tensor out({m, n});
  const int groups = axis == 1 ? m : n;
  const int len = axis == 1 ? n : m;
  auto idx = [axis, n](int g, int i) -> std::size_t {
    return axis == 1 ? static_cast<std::size_t>(g) * n + i : static_cast<std::size_t>(i) * n + g;
  };
  for (int g = 0; g < groups; ++g) {
    double mx = -1e300;
    for (int i = 0; i < len; ++i) mx = std::max(mx, t.data()[idx(g, i)]);
    double z = 0.0;
    for (int i = 0; i < len; ++i) z += std::exp(t.data()[idx(g, i)] - mx);
    for (int i = 0; i < len; ++i) out.data()[idx(g, i)] = std::exp(t.data()[idx(g, i)] - mx) / z;
  }
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, axis, m, n, idx](Node& self) {
    an->ensure_grad();
    const int groups = axis == 1 ? m : n;
    const int len = axis == 1 ? n : m;
    const double* y = self.value.data();
    const double* g = self.grad.data();
    double* d = an->grad.data();
    for (int gr = 0; gr < groups; ++gr) {
      double dot = 0.0;
      for (int i = 0; i < len; ++i) {
        const std::size_t k = idx(gr, i);
        dot += y[k] * g[k];
      }
      for (int i = 0; i < len; ++i) {
        const std::size_t k = idx(gr, i);
        d[k] += y[k] * (g[k] - dot);
      }
    }
  }));
}

}  // namespace

Var softmax_rows(const Var& a) { return softmax_axis(a, 1); }
Var softmax_cols(const Var& a) { return softmax_axis(a, 0); }

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  check_rank2(x, "layer_norm");
  const Tensor& t = x.value();
  const int m = t.rows(), n = t.cols();
  if (gamma.value().size() != static_cast<std::size_t>(n) || beta.value().size() != static_cast<std::size_t>(n))
    throw ShapeError("layer_norm affine params must have width " + std::to_string(n));
  Tensor out({m, n});
  Tensor xhat({m, n});
  Tensor inv_std({m, 1});
  for (int i = 0; i < m; ++i) {
    const double* row = t.data() + static_cast<std::size_t>(i) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += row[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std.data()[i] = is;
    for (int j = 0; j < n; ++j) {
      const double xh = (row[j] - mean) * is;
      xhat.at(i, j) = xh;
      out.at(i, j) = xh * gamma.value().data()[j] + beta.value().data()[j];
    }
  }
  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  return Var(make_node(std::move(out), {xn, gn, bn},
                       [xn, gn, bn, xhat = std::move(xhat), inv_std = std::move(inv_std), m, n](Node& self) {
    const double* g = self.grad.data();
    if (gn->requires_grad) {
      gn->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gn->grad.data()[j] += g[static_cast<std::size_t>(i) * n + j] * xhat.at(i, j);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) bn->grad.data()[j] += g[static_cast<std::size_t>(i) * n + j];
    }
    if (xn->requires_grad) {
      xn->ensure_grad();
      for (int i = 0; i < m; ++i) {
        const double is = inv_std.data()[i];
        double sum_gy = 0.0, sum_gyx = 0.0;
        for (int j = 0; j < n; ++j) {
          const double gy = g[static_cast<std::size_t>(i) * n + j] * gn->value.data()[j];
          sum_gy += gy;
          sum_gyx += gy * xhat.at(i, j);
        }
        for (int j = 0; j < n; ++j) {
          const double gy = g[static_cast<std::size_t>(i) * n + j] * gn->value.data()[j];
          xn->grad.at(i, j) += is * (gy - (sum_gy + xhat.at(i, j) * sum_gyx) / n);
        }
      }
    }
  }));
}

Var sum_all(const Var& a) {
  Tensor out({1, 1});
  double acc = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) acc += a.value().data()[i];
  out.data()[0] = acc;
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an](Node& self) {
    an->ensure_grad();
    const double g = self.grad.data()[0];
    for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad.data()[i] += g;
  }));
}

Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size())); }

Var row_sum(const Var& a) {
  check_rank2(a, "row_sum");
  const int m = a.rows(), n = a.cols();
  Tensor out({m, 1});
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += a.value().at(i, j);
    out.data()[i] = acc;
  }
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, m, n](Node& self) {
    an->ensure_grad();
    for (int i = 0; i < m; ++i) {
      const double g = self.grad.data()[i];
      for (int j = 0; j < n; ++j) an->grad.at(i, j) += g;
    }
  }));
}

Var mean_rows(const Var& a) {
  check_rank2(a, "mean_rows");
  const int m = a.rows(), n = a.cols();
  Tensor out({1, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.data()[j] += a.value().at(i, j);
  for (int j = 0; j < n; ++j) out.data()[j] /= m;
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, m, n](Node& self) {
    an->ensure_grad();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) an->grad.at(i, j) += self.grad.data()[j] / m;
  }));
}

Var transpose(const Var& a) {
  check_rank2(a, "transpose");
  const int m = a.rows(), n = a.cols();
  Tensor out({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(j, i) = a.value().at(i, j);
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, m, n](Node& self) {
    an->ensure_grad();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) an->grad.at(i, j) += self.grad.at(j, i);
  }));
}

Var reshape(const Var& a, std::vector<int> shape) {
  Tensor out = a.value().reshaped(shape);
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an](Node& self) {
    an->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad.data()[i] += self.grad.data()[i];
  }));
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const int n = parts[0].cols();
  int m = 0;
  for (const auto& p : parts) {
    check_rank2(p, "concat_rows");
    if (p.cols() != n) throw ShapeError("concat_rows column mismatch");
    m += p.rows();
  }
  Tensor out({m, n});
  std::vector<std::shared_ptr<Node>> nodes;
  int r = 0;
  std::vector<int> offsets;
  for (const auto& p : parts) {
    offsets.push_back(r);
    for (int i = 0; i < p.rows(); ++i)
      for (int j = 0; j < n; ++j) out.at(r + i, j) = p.value().at(i, j);
    r += p.rows();
    nodes.push_back(p.node());
  }
  return Var(make_node(std::move(out), nodes, [nodes, offsets, n](Node& self) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k]->requires_grad) continue;
      nodes[k]->ensure_grad();
      const int rows = nodes[k]->value.rows();
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < n; ++j) nodes[k]->grad.at(i, j) += self.grad.at(offsets[k] + i, j);
    }
  }));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const int m = parts[0].rows();
  int n = 0;
  for (const auto& p : parts) {
    check_rank2(p, "concat_cols");
    if (p.rows() != m) throw ShapeError("concat_cols row mismatch");
    n += p.cols();
  }
  Tensor out({m, n});
  std::vector<std::shared_ptr<Node>> nodes;
  std::vector<int> offsets;
  int c = 0;
  for (const auto& p : parts) {
    offsets.push_back(c);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < p.cols(); ++j) out.at(i, c + j) = p.value().at(i, j);
    c += p.cols();
    nodes.push_back(p.node());
  }
  return Var(make_node(std::move(out), nodes, [nodes, offsets, m](Node& self) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k]->requires_grad) continue;
      nodes[k]->ensure_grad();
      const int cols = nodes[k]->value.cols();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < cols; ++j) nodes[k]->grad.at(i, j) += self.grad.at(i, offsets[k] + j);
    }
  }));
}

Var slice_rows(const Var& a, int r0, int r1) {
  check_rank2(a, "slice_rows");
  if (r0 < 0 || r1 > a.rows() || r0 >= r1) throw ShapeError("slice_rows range invalid");
  const int n = a.cols();
  Tensor out({r1 - r0, n});
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < n; ++j) out.at(i - r0, j) = a.value().at(i, j);
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, r0, r1, n](Node& self) {
    an->ensure_grad();
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < n; ++j) an->grad.at(i, j) += self.grad.at(i - r0, j);
  }));
}

Var slice_cols(const Var& a, int c0, int c1) {
  check_rank2(a, "slice_cols");
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw ShapeError("slice_cols range invalid");
  const int m = a.rows();
  Tensor out({m, c1 - c0});
  for (int i = 0; i < m; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = a.value().at(i, j);
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, c0, c1, m](Node& self) {
    an->ensure_grad();
    for (int i = 0; i < m; ++i)
      for (int j = c0; j < c1; ++j) an->grad.at(i, j) += self.grad.at(i, j - c0);
  }));
}

Var select_rows(const Var& a, const std::vector<int>& idx) {
  check_rank2(a, "select_rows");
  const int n = a.cols();
  Tensor out({static_cast<int>(idx.size()), n});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.rows()) throw ShapeError("select_rows index out of range");
    for (int j = 0; j < n; ++j) out.at(static_cast<int>(i), j) = a.value().at(idx[i], j);
  }
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, idx, n](Node& self) {
    an->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < n; ++j) an->grad.at(idx[i], j) += self.grad.at(static_cast<int>(i), j);
  }));
}

Var repeat_row(const Var& a, int m) {
  check_rank2(a, "repeat_row");
  if (a.rows() != 1) throw ShapeError("repeat_row expects a single row");
  const int n = a.cols();
  Tensor out({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = a.value().data()[j];
  auto an = a.node();
  return Var(make_node(std::move(out), {an}, [an, m, n](Node& self) {
    an->ensure_grad();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) an->grad.data()[j] += self.grad.at(i, j);
  }));
}

Var detach(const Var& a) { return Var::constant(a.value()); }

Var im2col(const Var& x, int kernel, int stride, int pad) {
  const Tensor& t = x.value();
  if (t.rank() != 3) throw ShapeError("im2col expects (C,H,W), got " + t.shape_str());
  const int C = t.dim(0), H = t.dim(1), W = t.dim(2);
  const int oh = (H + 2 * pad - kernel) / stride + 1;
  const int ow = (W + 2 * pad - kernel) / stride + 1;
  if (oh <= 0 || ow <= 0) throw ShapeError("im2col output would be empty");
  const int cols = C * kernel * kernel;
  Tensor out({oh * ow, cols});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      double* row = out.data() + static_cast<std::size_t>(oy * ow + ox) * cols;
      int c0 = 0;
      for (int c = 0; c < C; ++c)
        for (int ky = 0; ky < kernel; ++ky)
          for (int kx = 0; kx < kernel; ++kx, ++c0) {
            const int iy = oy * stride + ky - pad;
            const int ix = ox * stride + kx - pad;
            row[c0] = (iy >= 0 && iy < H && ix >= 0 && ix < W)
                          ? t.data()[(static_cast<std::size_t>(c) * H + iy) * W + ix]
                          : 0.0;
          }
    }
  auto xn = x.node();
  return Var(make_node(std::move(out), {xn}, [xn, kernel, stride, pad, C, H, W, oh, ow](Node& self) {
    xn->ensure_grad();
    const int cols = C * kernel * kernel;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* row = self.grad.data() + static_cast<std::size_t>(oy * ow + ox) * cols;
        int c0 = 0;
        for (int c = 0; c < C; ++c)
          for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx, ++c0) {
              const int iy = oy * stride + ky - pad;
              const int ix = ox * stride + kx - pad;
              if (iy >= 0 && iy < H && ix >= 0 && ix < W)
                xn->grad.data()[(static_cast<std::size_t>(c) * H + iy) * W + ix] += row[c0];
            }
      }
  }));
}

Var mse(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value()))
    throw ShapeError("mse operands differ: " + a.value().shape_str() + " vs " + b.value().shape_str());
  return mean_all(square(sub(a, b)));
}

}  // namespace ad
}  // namespace slotbench
