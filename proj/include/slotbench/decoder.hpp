#pragma once

#include "slotbench/slot_attention.hpp"

namespace slotbench {

struct DecoderConfig {
  int d_pos = 32;
  int hidden = 64;
};

// Per-token mixture reconstruction of encoder features from slots.
struct Reconstruction {
  ad::Var features_hat;       // (N, D_feat)
  ad::Var alpha;              // (K, N), columns sum to 1
  ad::Var per_slot_features;  // (K*N, D_feat), slot-major
};

// Spatial-broadcast MLP decoder: each slot is tiled over all N positions,
// concatenated with a learned positional embedding, and mapped to
// D_feat + 1 (features plus an alpha logit). Alphas softmax over slots per
// position and mix per-slot features into the reconstruction.
class FeatureDecoder {
 public:
  FeatureDecoder() = default;
  FeatureDecoder(nn::ParamStore& ps, const DecoderConfig& cfg, int k, int d_slot, int d_feat, int n_tokens,
                 Rng& rng);

  Reconstruction decode(const ad::Var& slots) const;

  // MSE over all N * D_feat entries.
  static ad::Var reconstruction_loss(const Reconstruction& recon, const ad::Var& target);

  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  int k_ = 0, d_slot_ = 0, d_feat_ = 0, n_ = 0;
  ad::Var pos_;
  nn::Mlp mlp_;
};

}  // namespace slotbench
