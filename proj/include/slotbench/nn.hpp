#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotbench/autodiff.hpp"
#include "slotbench/rng.hpp"

namespace slotbench {
namespace nn {

// Named parameter registry. Iteration order = registration order, which
// fixes checkpoint layout and hash input; values are kept on the float32
// grid so serialization round-trips bitwise.
class ParamStore {
 public:
  ad::Var add(const std::string& name, Tensor init);
  ad::Var get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t count() const { return items_.size(); }

  const std::vector<std::pair<std::string, ad::Var>>& items() const { return items_; }

  void zero_grads();
  // SHA-256 over (name, shape, float32 payload) of every parameter.
  std::array<std::uint8_t, 32> content_hash() const;

 private:
  std::vector<std::pair<std::string, ad::Var>> items_;
  std::map<std::string, std::size_t> index_;
};

// ---- initializers ---------------------------------------------------------

Tensor glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng);
Tensor normal_init(std::vector<int> shape, double stddev, Rng& rng);

// ---- layers ----------------------------------------------------------------

struct Linear {
  ad::Var w, b;
  Linear() = default;
  Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);
  ad::Var forward(const ad::Var& x) const { return ad::add(ad::matmul(x, w), b); }
};

struct LayerNorm {
  ad::Var gamma, beta;
  double eps = 1e-5;
  LayerNorm() = default;
  LayerNorm(ParamStore& ps, const std::string& name, int dim);
  ad::Var forward(const ad::Var& x) const { return ad::layer_norm(x, gamma, beta, eps); }
};

// Fully connected stack with ReLU between layers (none after the last).
struct Mlp {
  std::vector<Linear> layers;
  Mlp() = default;
  Mlp(ParamStore& ps, const std::string& name, const std::vector<int>& dims, Rng& rng);
  ad::Var forward(ad::Var x) const;
};

// Multi-head self-attention over a (T, d) token matrix. Optional additive
// mask (T, T); optional capture of the head-averaged attention matrix.
struct MultiHeadSelfAttention {
  Linear wq, wk, wv, wo;
  int heads = 1;
  int d_model = 0;
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParamStore& ps, const std::string& name, int d, int n_heads, Rng& rng);
  ad::Var forward(const ad::Var& x, const Tensor* additive_mask = nullptr,
                  Tensor* attn_out = nullptr) const;
};

// Pre-norm transformer encoder layer: residuals bypass the norms, so a
// zero-weight layer is the identity map.
struct TransformerLayer {
  LayerNorm ln1, ln2;
  MultiHeadSelfAttention attn;
  Linear ffn1, ffn2;
  TransformerLayer() = default;
  TransformerLayer(ParamStore& ps, const std::string& name, int d, int heads, int ffn_hidden, Rng& rng);
  ad::Var forward(const ad::Var& x, const Tensor* additive_mask = nullptr,
                  Tensor* attn_out = nullptr) const;
};

// ---- optimizer -------------------------------------------------------------

// Adam with decoupled weight decay and linear warmup. Decay applies only to
// rank-2 weights with both dims > 1 (matrices), never to biases or norm
// affine parameters. Parameters are re-quantized to float32 after each step.
class AdamW {
 public:
  AdamW(const ParamStore& ps, double lr, double weight_decay, int warmup_steps);

  void step(const ParamStore& ps);
  int steps_taken() const { return t_; }
  double current_lr() const;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

 private:
  double lr_;
  double weight_decay_;
  int warmup_steps_;
  int t_ = 0;
  struct State {
    Tensor m, v;
    bool decay;
  };
  std::vector<State> state_;
};

}  // namespace nn
}  // namespace slotbench
