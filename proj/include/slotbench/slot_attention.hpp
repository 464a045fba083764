#pragma once

#include <optional>
#include <vector>

#include "slotbench/encoder.hpp"
#include "slotbench/nn.hpp"

namespace slotbench {

struct SlotAttentionConfig {
  int k = 6;
  int d_slot = 64;
  int d_attn = 64;
  int iters = 3;
  int mlp_hidden = 128;
  double epsilon = 1e-8;  // weighted-mean renormalization floor
};

// K slots plus the attention map from the final iteration. Attention
// columns (one per input token) sum to 1: slots compete for tokens.
struct SlotSet {
  Tensor slots;      // (K, D_slot)
  Tensor attention;  // (K, N)
  std::vector<Tensor> iteration_trace;  // optional per-iteration slot snapshots
};

// Iterative cross-attention with competition. The softmax runs over the
// slot axis per token; attention rows are then renormalized so each slot
// takes a weighted mean of the value vectors.
class SlotAttention {
 public:
  SlotAttention() = default;
  SlotAttention(nn::ParamStore& ps, const SlotAttentionConfig& cfg, int d_feat, Rng& rng);

  const SlotAttentionConfig& config() const { return cfg_; }

  // Learned-Gaussian initialization: mu + sigma .* eps, sigma floored at 1e-8.
  Tensor init_slots(Rng& rng) const;

  // Fixed-slots path: validated and returned verbatim.
  Tensor init_slots(const Tensor& fixed) const {
    if (fixed.rank() != 2 || fixed.rows() != cfg_.k || fixed.cols() != cfg_.d_slot)
      throw ShapeError("fixed slots " + fixed.shape_str() + " != (K, D_slot)");
    return fixed;
  }

  // One refinement step. Returns (new_slots, attention (K,N)).
  std::pair<ad::Var, ad::Var> attention_step(const ad::Var& slots, const ad::Var& tokens) const;

  // n_iters refinement steps from the given initial slots.
  struct Result {
    ad::Var slots;
    ad::Var attention;
    std::vector<Tensor> trace;
  };
  Result run(const ad::Var& tokens, const ad::Var& initial_slots, bool keep_trace = false) const;

  SlotSet run_inference(const Tensor& tokens, const Tensor& initial_slots, bool keep_trace = false) const;

 private:
  SlotAttentionConfig cfg_;
  int d_feat_ = 0;
  nn::LayerNorm ln_input_, ln_slots_, ln_mlp_;
  ad::Var w_q_, w_k_, w_v_;
  // Gated recurrent update: reset gate r, write gate g, candidate c.
  // s' = s + sigmoid(pre_g) .* tanh(pre_c), which is the identity map at
  // zero parameters.
  ad::Var w_ur_, w_sr_, b_r_;
  ad::Var w_ug_, w_sg_, b_g_;
  ad::Var w_uc_, w_sc_, b_c_;
  nn::Mlp mlp_;
  ad::Var mu_, log_sigma_;
};

}  // namespace slotbench
