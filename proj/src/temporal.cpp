#include "slotbench/temporal.hpp"

namespace slotbench {

using ad::Var;

TemporalSlotTransformer::TemporalSlotTransformer(nn::ParamStore& ps, const TemporalConfig& cfg, int k,
                                                 int d_slot, Rng& rng)
    : cfg_(cfg), k_(k), d_slot_(d_slot) {
  layer_ = nn::TransformerLayer(ps, "temporal.layer", d_slot, cfg.heads, cfg.ffn_hidden, rng);
  seed_ = ps.add("temporal.seed_slots", nn::normal_init({k, d_slot}, 0.02, rng));
}

Var TemporalSlotTransformer::propagate(const std::optional<Var>& prev_slots) const {
  const Var& input = prev_slots ? *prev_slots : seed_;
  if (input.value().rank() != 2 || input.rows() != k_ || input.cols() != d_slot_)
    throw ShapeError("temporal input " + input.value().shape_str() + " != (K, D_slot)");
  return layer_.forward(input);
}

Tensor TemporalSlotTransformer::propagate_inference(const Tensor* prev_slots) const {
  std::optional<Var> prev;
  if (prev_slots) prev = Var::constant(*prev_slots);
  return propagate(prev).value();
}

std::vector<SlotSet> encode_video(const std::vector<FeatureGrid>& frames, const SlotAttention& sa,
                                  const TemporalSlotTransformer& temporal,
                                  const std::function<void(int, const Tensor&)>& on_init) {
  if (frames.empty()) throw InvalidInput("encode_video on empty frame sequence");
  const int n = frames[0].tokens.rows();
  const int d = frames[0].tokens.cols();
  std::vector<SlotSet> out;
  out.reserve(frames.size());
  Tensor prev;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].tokens.rows() != n || frames[t].tokens.cols() != d)
      throw ShapeError("frame " + std::to_string(t) + " shape " + frames[t].tokens.shape_str() +
                       " differs from frame 0");
    const Tensor init = temporal.propagate_inference(t == 0 ? nullptr : &prev);
    if (on_init) on_init(static_cast<int>(t), init);
    SlotSet s = sa.run_inference(frames[t].tokens, init);
    prev = s.slots;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace slotbench
