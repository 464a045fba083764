#include "slotbench/slot_attention.hpp"

#include <cmath>

namespace slotbench {

using ad::Var;

SlotAttention::SlotAttention(nn::ParamStore& ps, const SlotAttentionConfig& cfg, int d_feat, Rng& rng)
    : cfg_(cfg), d_feat_(d_feat) {
  if (cfg.k < 1) throw ConfigError("slot.k must be >= 1");
  if (cfg.iters < 1) throw ConfigError("slot.iters must be >= 1");
  ln_input_ = nn::LayerNorm(ps, "sa.ln_input", d_feat);
  ln_slots_ = nn::LayerNorm(ps, "sa.ln_slots", cfg.d_slot);
  ln_mlp_ = nn::LayerNorm(ps, "sa.ln_mlp", cfg.d_slot);
  w_q_ = ps.add("sa.w_q", nn::glorot({cfg.d_slot, cfg.d_attn}, cfg.d_slot, cfg.d_attn, rng));
  w_k_ = ps.add("sa.w_k", nn::glorot({d_feat, cfg.d_attn}, d_feat, cfg.d_attn, rng));
  w_v_ = ps.add("sa.w_v", nn::glorot({d_feat, cfg.d_slot}, d_feat, cfg.d_slot, rng));
  w_ur_ = ps.add("sa.upd.w_ur", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  w_sr_ = ps.add("sa.upd.w_sr", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  b_r_ = ps.add("sa.upd.b_r", Tensor::zeros({1, cfg.d_slot}));
  w_ug_ = ps.add("sa.upd.w_ug", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  w_sg_ = ps.add("sa.upd.w_sg", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  b_g_ = ps.add("sa.upd.b_g", Tensor::zeros({1, cfg.d_slot}));
  w_uc_ = ps.add("sa.upd.w_uc", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  w_sc_ = ps.add("sa.upd.w_sc", nn::glorot({cfg.d_slot, cfg.d_slot}, cfg.d_slot, cfg.d_slot, rng));
  b_c_ = ps.add("sa.upd.b_c", Tensor::zeros({1, cfg.d_slot}));
  mlp_ = nn::Mlp(ps, "sa.mlp", {cfg.d_slot, cfg.mlp_hidden, cfg.d_slot}, rng);
  mu_ = ps.add("sa.mu", nn::normal_init({1, cfg.d_slot}, 0.02, rng));
  log_sigma_ = ps.add("sa.log_sigma", Tensor::zeros({1, cfg.d_slot}));
}

Tensor SlotAttention::init_slots(Rng& rng) const {
  Tensor out({cfg_.k, cfg_.d_slot});
  for (int k = 0; k < cfg_.k; ++k)
    for (int d = 0; d < cfg_.d_slot; ++d) {
      const double sigma = std::max(std::exp(log_sigma_.value().data()[d]), 1e-8);
      out.at(k, d) = mu_.value().data()[d] + sigma * rng.normal();
    }
  return out;
}

std::pair<Var, Var> SlotAttention::attention_step(const Var& slots, const Var& tokens) const {
  if (slots.cols() != cfg_.d_slot)
    throw ShapeError("slots width " + std::to_string(slots.cols()) + " != d_slot " + std::to_string(cfg_.d_slot));
  if (tokens.cols() != d_feat_)
    throw ShapeError("token width " + std::to_string(tokens.cols()) + " != d_feat " + std::to_string(d_feat_));
  if (!slots.value().all_finite() || !tokens.value().all_finite())
    throw NumericError("non-finite input to attention_step");

  Var x = ln_input_.forward(tokens);              // (N, D_feat)
  Var q = ad::matmul(ln_slots_.forward(slots), w_q_);  // (K, D_attn)
  Var k = ad::matmul(x, w_k_);                    // (N, D_attn)
  Var v = ad::matmul(x, w_v_);                    // (N, D_slot)

  Var logits = ad::scale(ad::matmul(q, ad::transpose(k)), 1.0 / std::sqrt(static_cast<double>(cfg_.d_attn)));
  Var attn = ad::softmax_cols(logits);            // competition: softmax over slots, per token
  Var weights = ad::div(attn, ad::add_const(ad::row_sum(attn), cfg_.epsilon));  // weighted mean per slot
  Var updates = ad::matmul(weights, v);           // (K, D_slot)

  // Gated recurrent update; identity when all update parameters are zero.
  Var reset = ad::sigmoid(ad::add(ad::add(ad::matmul(updates, w_ur_), ad::matmul(slots, w_sr_)), b_r_));
  Var gate = ad::sigmoid(ad::add(ad::add(ad::matmul(updates, w_ug_), ad::matmul(slots, w_sg_)), b_g_));
  Var cand = ad::tanh_(
      ad::add(ad::add(ad::matmul(updates, w_uc_), ad::matmul(ad::mul(reset, slots), w_sc_)), b_c_));
  Var next = ad::add(slots, ad::mul(gate, cand));

  // Residual MLP.
  Var refined = ad::add(next, mlp_.forward(ln_mlp_.forward(next)));
  return {refined, attn};
}

SlotAttention::Result SlotAttention::run(const Var& tokens, const Var& initial_slots, bool keep_trace) const {
  if (initial_slots.rows() != cfg_.k || initial_slots.cols() != cfg_.d_slot)
    throw ShapeError("initial slots " + initial_slots.value().shape_str() + " != (K, D_slot)");
  Result res;
  Var slots = initial_slots;
  Var attn;
  for (int it = 0; it < cfg_.iters; ++it) {
    auto [next, a] = attention_step(slots, tokens);
    slots = next;
    attn = a;
    if (keep_trace) res.trace.push_back(slots.value());
  }
  res.slots = slots;
  res.attention = attn;
  return res;
}

SlotSet SlotAttention::run_inference(const Tensor& tokens, const Tensor& initial_slots, bool keep_trace) const {
  auto res = run(Var::constant(tokens), Var::constant(initial_slots), keep_trace);
  SlotSet out;
  out.slots = res.slots.value();
  out.attention = res.attention.value();
  out.iteration_trace = std::move(res.trace);
  return out;
}

}  // namespace slotbench
