#include "slotbench/encoder.hpp"

#include "slotbench/io.hpp"

namespace slotbench {

using ad::Var;

Tensor image_to_tensor(const Image& img) {
  Tensor t({3, img.height, img.width});
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        t.data()[c * plane + static_cast<std::size_t>(y) * img.width + x] = img.at(y, x, c) / 255.0;
  return t;
}

Encoder::Encoder(nn::ParamStore& ps, const EncoderConfig& cfg, int image_h, int image_w, Rng& rng)
    : cfg_(cfg), image_h_(image_h), image_w_(image_w) {
  if (cfg.patch != 8) throw ConfigError("encoder patch stride must be 8 (three stride-2 stages)");
  if (image_h % cfg.patch != 0 || image_w % cfg.patch != 0)
    throw ShapeError("image " + std::to_string(image_h) + "x" + std::to_string(image_w) +
                     " not divisible by patch " + std::to_string(cfg.patch));
  grid_rows_ = image_h / cfg.patch;
  grid_cols_ = image_w / cfg.patch;
  const int n = grid_rows_ * grid_cols_;
  conv1_w_ = ps.add("enc.conv1.w", nn::glorot({3 * 4 * 4, cfg.c1}, 3 * 16, cfg.c1, rng));
  conv1_b_ = ps.add("enc.conv1.b", Tensor::zeros({1, cfg.c1}));
  conv2_w_ = ps.add("enc.conv2.w", nn::glorot({cfg.c1 * 4 * 4, cfg.c2}, cfg.c1 * 16, cfg.c2, rng));
  conv2_b_ = ps.add("enc.conv2.b", Tensor::zeros({1, cfg.c2}));
  conv3_w_ = ps.add("enc.conv3.w", nn::glorot({cfg.c2 * 4 * 4, cfg.c3}, cfg.c2 * 16, cfg.c3, rng));
  conv3_b_ = ps.add("enc.conv3.b", Tensor::zeros({1, cfg.c3}));
  proj_w_ = ps.add("enc.proj.w", nn::glorot({cfg.c3, cfg.d_feat}, cfg.c3, cfg.d_feat, rng));
  proj_b_ = ps.add("enc.proj.b", Tensor::zeros({1, cfg.d_feat}));
  ln_ = nn::LayerNorm(ps, "enc.ln", cfg.d_feat);
  pos_ = ps.add("enc.pos", nn::normal_init({n, cfg.d_feat}, 0.02, rng));
}

namespace {

// One stride-2 conv stage: im2col + matmul + bias, output back to (C,H,W).
Var conv_stage(const Var& x, const Var& w, const Var& b, int out_c, int out_h, int out_w) {
  Var cols = ad::im2col(x, 4, 2, 1);                       // (out_h*out_w, C_in*16)
  Var y = ad::add(ad::matmul(cols, w), b);                 // (out_h*out_w, out_c)
  return ad::reshape(ad::transpose(y), {out_c, out_h, out_w});
}

}  // namespace

Var Encoder::encode(const Image& img, Var* conv_activation) const {
  if (img.height != image_h_ || img.width != image_w_)
    throw ShapeError("encoder built for " + std::to_string(image_h_) + "x" + std::to_string(image_w_) +
                     ", got image " + std::to_string(img.height) + "x" + std::to_string(img.width));
  Var x = Var::constant(image_to_tensor(img));
  const int h1 = image_h_ / 2, w1 = image_w_ / 2;
  const int h2 = h1 / 2, w2 = w1 / 2;
  const int h3 = h2 / 2, w3 = w2 / 2;
  Var a1 = ad::relu(conv_stage(x, conv1_w_, conv1_b_, cfg_.c1, h1, w1));
  Var a2 = ad::relu(conv_stage(a1, conv2_w_, conv2_b_, cfg_.c2, h2, w2));
  Var a3 = ad::relu(conv_stage(a2, conv3_w_, conv3_b_, cfg_.c3, h3, w3));
  if (conv_activation) *conv_activation = a3;
  // (C, N) -> (N, C) token layout, then project and normalize.
  Var tokens = ad::transpose(ad::reshape(a3, {cfg_.c3, h3 * w3}));
  Var projected = ad::add(ad::matmul(tokens, proj_w_), proj_b_);
  return ad::add(ln_.forward(projected), pos_);
}

FeatureGrid Encoder::encode_grid(const Image& img) const {
  FeatureGrid g;
  g.tokens = encode(img).value();
  g.rows = grid_rows_;
  g.cols = grid_cols_;
  g.source_tag = "slotbench-conv/p" + std::to_string(cfg_.patch) + "d" + std::to_string(cfg_.d_feat);
  return g;
}

GlobalFeature global_pool(const FeatureGrid& grid, PoolKind kind) {
  const int n = grid.tokens.rows();
  const int d = grid.tokens.cols();
  if (n == 0 || d == 0) throw InvalidInput("global_pool on empty grid");
  GlobalFeature out;
  out.kind = kind;
  out.vector = Tensor({1, d});
  if (kind == PoolKind::mean) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) out.vector.data()[j] += grid.tokens.at(i, j);
    for (int j = 0; j < d; ++j) out.vector.data()[j] /= n;
  } else {
    for (int j = 0; j < d; ++j) out.vector.data()[j] = grid.tokens.at(0, j);
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < d; ++j) out.vector.data()[j] = std::max(out.vector.data()[j], grid.tokens.at(i, j));
  }
  return out;
}

// ---- Feature Archive --------------------------------------------------------

namespace {
constexpr char kFeatureMagic[4] = {'S', 'B', 'F', 'A'};
constexpr std::uint32_t kFeatureVersion = 1;
}  // namespace

void write_feature_archive(const std::string& path, const std::vector<FeatureGrid>& grids) {
  ByteWriter w;
  w.magic(kFeatureMagic);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(grids.size()));
  for (const auto& g : grids) {
    const int n = g.tokens.rows(), d = g.tokens.cols();
    if (g.rows * g.cols != n) throw ShapeError("feature grid rows*cols != N");
    w.u32(static_cast<std::uint32_t>(n));
    w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(g.rows));
    w.u32(static_cast<std::uint32_t>(g.cols));
    for (std::size_t i = 0; i < g.tokens.size(); ++i) w.f32(static_cast<float>(g.tokens.data()[i]));
    w.str(g.source_tag);
  }
  atomic_write(path, w);
}

std::vector<FeatureGrid> load_precomputed_features(const std::string& path) {
  ByteReader r(read_file(path));
  r.expect_magic(kFeatureMagic, "feature archive");
  const std::uint32_t version = r.u32();
  if (version != kFeatureVersion)
    throw FormatError("unsupported feature archive version " + std::to_string(version), r.offset() - 4);
  const std::uint32_t count = r.u32();
  std::vector<FeatureGrid> grids;
  grids.reserve(count);
  for (std::uint32_t g = 0; g < count; ++g) {
    FeatureGrid fg;
    const std::uint32_t n = r.u32();
    const std::uint32_t d = r.u32();
    fg.rows = static_cast<int>(r.u32());
    fg.cols = static_cast<int>(r.u32());
    if (static_cast<std::uint64_t>(fg.rows) * fg.cols != n)
      throw FormatError("grid " + std::to_string(g) + " declares rows*cols != N", r.offset() - 8);
    r.need(static_cast<std::size_t>(n) * d * 4, "grid " + std::to_string(g) + " tokens");
    fg.tokens = Tensor({static_cast<int>(n), static_cast<int>(d)});
    for (std::size_t i = 0; i < fg.tokens.size(); ++i) fg.tokens.data()[i] = r.f32();
    fg.source_tag = r.str();
    grids.push_back(std::move(fg));
  }
  return grids;
}

}  // namespace slotbench
