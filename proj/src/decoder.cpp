#include "slotbench/decoder.hpp"

namespace slotbench {

using ad::Var;

FeatureDecoder::FeatureDecoder(nn::ParamStore& ps, const DecoderConfig& cfg, int k, int d_slot, int d_feat,
                               int n_tokens, Rng& rng)
    : cfg_(cfg), k_(k), d_slot_(d_slot), d_feat_(d_feat), n_(n_tokens) {
  pos_ = ps.add("dec.pos", nn::normal_init({n_tokens, cfg.d_pos}, 0.02, rng));
  mlp_ = nn::Mlp(ps, "dec.mlp", {d_slot + cfg.d_pos, cfg.hidden, cfg.hidden, d_feat + 1}, rng);
}

Reconstruction FeatureDecoder::decode(const Var& slots) const {
  if (slots.rows() != k_ || slots.cols() != d_slot_)
    throw ShapeError("decoder got slots " + slots.value().shape_str() + ", wants (" + std::to_string(k_) +
                     "," + std::to_string(d_slot_) + ")");
  // Broadcast each slot over all positions: rows are slot-major (k*N + n).
  std::vector<Var> blocks;
  blocks.reserve(static_cast<std::size_t>(k_));
  for (int k = 0; k < k_; ++k) {
    Var slot_row = ad::slice_rows(slots, k, k + 1);
    blocks.push_back(ad::concat_cols({ad::repeat_row(slot_row, n_), pos_}));
  }
  Var decoded = mlp_.forward(ad::concat_rows(blocks));  // (K*N, D_feat+1)

  Reconstruction rec;
  rec.per_slot_features = ad::slice_cols(decoded, 0, d_feat_);
  Var alpha_logits = ad::reshape(ad::slice_cols(decoded, d_feat_, d_feat_ + 1), {k_, n_});
  rec.alpha = ad::softmax_cols(alpha_logits);

  Var mix;
  for (int k = 0; k < k_; ++k) {
    Var feats_k = ad::slice_rows(rec.per_slot_features, k * n_, (k + 1) * n_);  // (N, D_feat)
    Var alpha_k = ad::transpose(ad::slice_rows(rec.alpha, k, k + 1));           // (N, 1)
    Var weighted = ad::mul(feats_k, alpha_k);
    mix = k == 0 ? weighted : ad::add(mix, weighted);
  }
  rec.features_hat = mix;
  return rec;
}

Var FeatureDecoder::reconstruction_loss(const Reconstruction& recon, const Var& target) {
  if (!recon.features_hat.value().same_shape(target.value()))
    throw ShapeError("reconstruction " + recon.features_hat.value().shape_str() + " vs target " +
                     target.value().shape_str());
  return ad::mse(recon.features_hat, target);
}

}  // namespace slotbench
