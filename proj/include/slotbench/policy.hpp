#pragma once

#include <string>
#include <vector>

#include "slotbench/nn.hpp"

namespace slotbench {

struct PolicyConfig {
  int d_tok = 128;
  int layers = 4;
  int heads = 4;
  int ffn_hidden = 256;
  int head_hidden = 128;
  int t_hist = 2;
  int d_act = 3;
  int d_visual = 64;   // width of incoming visual tokens
  int d_proprio = 3;
  int n_tasks = 4;
};

// One timestep of policy input: visual tokens (K slots, N dense tokens, or
// one pooled vector), proprioception, and task index.
struct ObservationBundle {
  Tensor visual;   // (M, d_visual)
  Tensor proprio;  // (1, d_proprio)
  int task_index = 0;
  int timestep = 0;
};

// Multi-task behavior-cloning policy: per-modality adapters feed a
// transformer trunk under a block-causal mask (tokens attend within their
// timestep and backwards), interleaved with a learnable action token per
// timestep; an MLP head reads the final action token. Language embeddings
// are a learned per-task table.
class Policy {
 public:
  Policy() = default;
  Policy(nn::ParamStore& ps, const PolicyConfig& cfg, Rng& rng);

  struct TokenSeq {
    ad::Var tokens;               // (T_total, d_tok)
    std::vector<int> action_idx;  // one per timestep
    std::vector<int> block_of;    // timestep block id per token row
  };

  TokenSeq assemble_tokens(const std::vector<ObservationBundle>& history) const;

  // attn_out (when non-null) receives one head-averaged (T,T) matrix per layer.
  ad::Var trunk_forward(const TokenSeq& seq, std::vector<Tensor>* attn_out = nullptr) const;

  ad::Var predict_action(const std::vector<ObservationBundle>& history,
                         std::vector<Tensor>* attn_out = nullptr) const;

  static ad::Var bc_loss(const ad::Var& predicted, const ad::Var& expert);

  const PolicyConfig& config() const { return cfg_; }

 private:
  PolicyConfig cfg_;
  nn::Linear visual_adapter_, proprio_adapter_;
  ad::Var task_table_;    // (n_tasks, d_tok)
  ad::Var action_token_;  // (1, d_tok)
  ad::Var pos_time_;      // (t_hist, d_tok)
  std::vector<nn::TransformerLayer> trunk_;
  nn::Mlp head_;
};

// Block-causal additive mask: entry (i, j) is 0 if block_of[j] <= block_of[i],
// else -1e30.
Tensor block_causal_mask(const std::vector<int>& block_of);

}  // namespace slotbench
