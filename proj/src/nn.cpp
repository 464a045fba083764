#include "slotbench/nn.hpp"

#include <cmath>

#include "slotbench/sha256.hpp"

namespace slotbench {
namespace nn {

ad::Var ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name " + name);
  quantize_f32(init);
  ad::Var v = ad::Var::leaf(std::move(init));
  index_[name] = items_.size();
  items_.emplace_back(name, v);
  return v;
}

ad::Var ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter " + name);
  return items_[it->second].second;
}

void ParamStore::zero_grads() {
  for (auto& [name, v] : items_) ad::zero_grad(v);
}

std::array<std::uint8_t, 32> ParamStore::content_hash() const {
  Sha256 h;
  for (const auto& [name, v] : items_) {
    h.update(name.data(), name.size());
    const auto& t = v.value();
    for (int d : t.shape()) {
      const std::uint32_t u = static_cast<std::uint32_t>(d);
      h.update(&u, 4);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      const float f = static_cast<float>(t.data()[i]);
      h.update(&f, 4);
    }
  }
  return h.finish();
}

Tensor glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-limit, limit);
  return t;
}

Tensor normal_init(std::vector<int> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = stddev * rng.normal();
  return t;
}

Linear::Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
  w = ps.add(name + ".w", glorot({in, out}, in, out, rng));
  b = ps.add(name + ".b", Tensor::zeros({1, out}));
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int dim) {
  gamma = ps.add(name + ".g", Tensor::full({1, dim}, 1.0));
  beta = ps.add(name + ".b", Tensor::zeros({1, dim}));
}

Mlp::Mlp(ParamStore& ps, const std::string& name, const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw ShapeError("Mlp needs at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    layers.emplace_back(ps, name + ".l" + std::to_string(i), dims[i], dims[i + 1], rng);
}

ad::Var Mlp::forward(ad::Var x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i].forward(x);
    if (i + 1 < layers.size()) x = ad::relu(x);
  }
  return x;
}

MultiHeadSelfAttention::MultiHeadSelfAttention(ParamStore& ps, const std::string& name, int d,
                                               int n_heads, Rng& rng)
    : heads(n_heads), d_model(d) {
  if (d % n_heads != 0) throw ShapeError("d_model " + std::to_string(d) + " not divisible by heads");
  wq = Linear(ps, name + ".q", d, d, rng);
  wk = Linear(ps, name + ".k", d, d, rng);
  wv = Linear(ps, name + ".v", d, d, rng);
  wo = Linear(ps, name + ".o", d, d, rng);
}

ad::Var MultiHeadSelfAttention::forward(const ad::Var& x, const Tensor* additive_mask,
                                        Tensor* attn_out) const {
  const int T = x.rows();
  const int dh = d_model / heads;
  ad::Var q = wq.forward(x);
  ad::Var k = wk.forward(x);
  ad::Var v = wv.forward(x);
  if (additive_mask && (additive_mask->rows() != T || additive_mask->cols() != T))
    throw ShapeError("attention mask must be (T,T)");
  if (attn_out) *attn_out = Tensor::zeros({T, T});
  std::vector<ad::Var> head_outs;
  head_outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    ad::Var logits = ad::scale(ad::matmul(qh, ad::transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
    if (additive_mask) logits = ad::add(logits, ad::Var::constant(*additive_mask));
    ad::Var a = ad::softmax_rows(logits);
    if (attn_out)
      for (std::size_t i = 0; i < attn_out->size(); ++i)
        attn_out->data()[i] += a.value().data()[i] / heads;
    head_outs.push_back(ad::matmul(a, vh));
  }
  return wo.forward(ad::concat_cols(head_outs));
}

TransformerLayer::TransformerLayer(ParamStore& ps, const std::string& name, int d, int heads,
                                   int ffn_hidden, Rng& rng) {
  ln1 = LayerNorm(ps, name + ".ln1", d);
  ln2 = LayerNorm(ps, name + ".ln2", d);
  attn = MultiHeadSelfAttention(ps, name + ".attn", d, heads, rng);
  ffn1 = Linear(ps, name + ".ffn1", d, ffn_hidden, rng);
  ffn2 = Linear(ps, name + ".ffn2", ffn_hidden, d, rng);
}

ad::Var TransformerLayer::forward(const ad::Var& x, const Tensor* additive_mask,
                                  Tensor* attn_out) const {
  ad::Var h = ad::add(x, attn.forward(ln1.forward(x), additive_mask, attn_out));
  ad::Var f = ffn2.forward(ad::relu(ffn1.forward(ln2.forward(h))));
  return ad::add(h, f);
}

AdamW::AdamW(const ParamStore& ps, double lr, double weight_decay, int warmup_steps)
    : lr_(lr), weight_decay_(weight_decay), warmup_steps_(warmup_steps) {
  for (const auto& [name, v] : ps.items()) {
    State s;
    s.m = Tensor::zeros(v.value().shape());
    s.v = Tensor::zeros(v.value().shape());
    const auto& shape = v.value().shape();
    s.decay = shape.size() == 2 && shape[0] > 1 && shape[1] > 1;
    state_.push_back(std::move(s));
  }
}

double AdamW::current_lr() const {
  if (warmup_steps_ > 0 && t_ < warmup_steps_)
    return lr_ * static_cast<double>(t_ + 1) / static_cast<double>(warmup_steps_);
  return lr_;
}

void AdamW::step(const ParamStore& ps) {
  if (ps.items().size() != state_.size()) throw ContractError("optimizer bound to a different store");
  const double lr_t = current_lr();
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, t_);
  const double bc2 = 1.0 - std::pow(beta2, t_);
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const auto& var = ps.items()[i].second;
    auto node = var.node();
    if (!node->grad_ready) continue;
    Tensor& x = node->value;
    const Tensor& g = node->grad;
    State& s = state_[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double gj = g.data()[j];
      s.m.data()[j] = beta1 * s.m.data()[j] + (1.0 - beta1) * gj;
      s.v.data()[j] = beta2 * s.v.data()[j] + (1.0 - beta2) * gj * gj;
      const double mhat = s.m.data()[j] / bc1;
      const double vhat = s.v.data()[j] / bc2;
      double upd = mhat / (std::sqrt(vhat) + eps);
      if (s.decay) upd += weight_decay_ * x.data()[j];
      x.data()[j] -= lr_t * upd;
    }
    quantize_f32(x);
    node->grad.fill(0.0);
  }
}

}  // namespace nn
}  // namespace slotbench
