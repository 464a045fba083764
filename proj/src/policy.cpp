#include "slotbench/policy.hpp"

namespace slotbench {

using ad::Var;

Policy::Policy(nn::ParamStore& ps, const PolicyConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.t_hist < 1) throw ConfigError("policy.t_hist must be >= 1");
  visual_adapter_ = nn::Linear(ps, "policy.visual_adapter", cfg.d_visual, cfg.d_tok, rng);
  proprio_adapter_ = nn::Linear(ps, "policy.proprio_adapter", cfg.d_proprio, cfg.d_tok, rng);
  task_table_ = ps.add("policy.task_table", nn::normal_init({cfg.n_tasks, cfg.d_tok}, 0.02, rng));
  action_token_ = ps.add("policy.action_token", nn::normal_init({1, cfg.d_tok}, 0.02, rng));
  pos_time_ = ps.add("policy.pos_time", nn::normal_init({cfg.t_hist, cfg.d_tok}, 0.02, rng));
  for (int l = 0; l < cfg.layers; ++l)
    trunk_.emplace_back(ps, "policy.trunk" + std::to_string(l), cfg.d_tok, cfg.heads, cfg.ffn_hidden, rng);
  head_ = nn::Mlp(ps, "policy.head", {cfg.d_tok, cfg.head_hidden, cfg.d_act}, rng);
}

Tensor block_causal_mask(const std::vector<int>& block_of) {
  const int t = static_cast<int>(block_of.size());
  Tensor mask({t, t});
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) mask.at(i, j) = block_of[j] <= block_of[i] ? 0.0 : -1e30;
  return mask;
}

Policy::TokenSeq Policy::assemble_tokens(const std::vector<ObservationBundle>& history) const {
  if (history.empty()) throw InvalidInput("assemble_tokens needs at least one observation");
  if (static_cast<int>(history.size()) > cfg_.t_hist)
    throw InvalidInput("history length " + std::to_string(history.size()) + " exceeds t_hist " +
                       std::to_string(cfg_.t_hist));
  TokenSeq seq;
  std::vector<Var> parts;
  int row = 0;
  for (std::size_t t = 0; t < history.size(); ++t) {
    const auto& obs = history[t];
    if (obs.visual.cols() != cfg_.d_visual)
      throw ShapeError("visual token width " + std::to_string(obs.visual.cols()) + " != d_visual " +
                       std::to_string(cfg_.d_visual));
    if (obs.task_index < 0 || obs.task_index >= cfg_.n_tasks)
      throw InvalidInput("task index " + std::to_string(obs.task_index) + " out of range");
    Var vis = visual_adapter_.forward(Var::constant(obs.visual));
    Var pro = proprio_adapter_.forward(Var::constant(obs.proprio));
    Var task = ad::select_rows(task_table_, {obs.task_index});
    Var block = ad::concat_rows({vis, pro, task, action_token_});
    // Positional encoding per timestep block; no ordering within the block.
    Var pos = ad::select_rows(pos_time_, {static_cast<int>(t)});
    block = ad::add(block, pos);
    const int rows = block.rows();
    for (int i = 0; i < rows; ++i) seq.block_of.push_back(static_cast<int>(t));
    row += rows;
    seq.action_idx.push_back(row - 1);
    parts.push_back(block);
  }
  seq.tokens = ad::concat_rows(parts);
  return seq;
}

Var Policy::trunk_forward(const TokenSeq& seq, std::vector<Tensor>* attn_out) const {
  if (!seq.tokens.value().all_finite()) throw NumericError("non-finite tokens into trunk");
  const Tensor mask = block_causal_mask(seq.block_of);
  Var x = seq.tokens;
  for (const auto& layer : trunk_) {
    Tensor attn;
    x = layer.forward(x, &mask, attn_out ? &attn : nullptr);
    if (attn_out) attn_out->push_back(std::move(attn));
  }
  return x;
}

Var Policy::predict_action(const std::vector<ObservationBundle>& history,
                           std::vector<Tensor>* attn_out) const {
  TokenSeq seq = assemble_tokens(history);
  Var ctx = trunk_forward(seq, attn_out);
  const int last_action = seq.action_idx.back();
  return head_.forward(ad::slice_rows(ctx, last_action, last_action + 1));
}

Var Policy::bc_loss(const Var& predicted, const Var& expert) {
  if (!predicted.value().same_shape(expert.value()))
    throw ShapeError("bc_loss shapes " + predicted.value().shape_str() + " vs " +
                     expert.value().shape_str());
  return ad::mse(predicted, expert);
}

}  // namespace slotbench
