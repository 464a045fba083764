#pragma once

#include <string>
#include <vector>

#include "slotbench/nn.hpp"

namespace slotbench {

// 8-bit RGB image, row-major, channel-interleaved.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;  // height*width*3

  Image() = default;
  Image(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {}
  std::uint8_t& at(int y, int x, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

// Dense token set for one image: N x D_feat, with the spatial grid that
// produced it.
struct FeatureGrid {
  Tensor tokens;  // (N, D)
  int rows = 0;
  int cols = 0;
  std::string source_tag;

  int token_count() const { return tokens.rows(); }
  int feat_dim() const { return tokens.cols(); }
};

enum class PoolKind { mean, max };

struct GlobalFeature {
  Tensor vector;  // (1, D)
  PoolKind kind = PoolKind::mean;
};

struct EncoderConfig {
  int patch = 8;  // total spatial stride; image dims must be divisible by it
  int d_feat = 64;
  int c1 = 16, c2 = 32, c3 = 48;
};

// Shallow strided-conv patchifier + linear projection + layer norm, learned
// positional embedding added last. Trained during representation
// pretraining, then frozen for policy learning.
class Encoder {
 public:
  Encoder() = default;
  Encoder(nn::ParamStore& ps, const EncoderConfig& cfg, int image_h, int image_w, Rng& rng);

  // Optionally captures the last conv activation (C,H,W) for saliency tools.
  ad::Var encode(const Image& img, ad::Var* conv_activation = nullptr) const;

  FeatureGrid encode_grid(const Image& img) const;

  const EncoderConfig& config() const { return cfg_; }
  int grid_rows() const { return grid_rows_; }
  int grid_cols() const { return grid_cols_; }
  int token_count() const { return grid_rows_ * grid_cols_; }

 private:
  EncoderConfig cfg_;
  int image_h_ = 0, image_w_ = 0;
  int grid_rows_ = 0, grid_cols_ = 0;
  ad::Var conv1_w_, conv1_b_, conv2_w_, conv2_b_, conv3_w_, conv3_b_;
  ad::Var proj_w_, proj_b_;
  nn::LayerNorm ln_;
  ad::Var pos_;
};

// Pool a grid into a single vector. Plain tensor math: pooling is only used
// downstream of the frozen encoder.
GlobalFeature global_pool(const FeatureGrid& grid, PoolKind kind);

// ---- Feature Archive ("SBFA") ----------------------------------------------

void write_feature_archive(const std::string& path, const std::vector<FeatureGrid>& grids);
std::vector<FeatureGrid> load_precomputed_features(const std::string& path);

// Image in [0,255] -> (3, H, W) doubles in [0,1].
Tensor image_to_tensor(const Image& img);

}  // namespace slotbench
