#pragma once

#include <functional>
#include <optional>

#include "slotbench/slot_attention.hpp"

namespace slotbench {

struct TemporalConfig {
  int heads = 4;
  int ffn_hidden = 128;
  int bptt_window = 4;  // max consecutive frames gradients flow through
};

// Slot-wise self-attention transformer layer transmitting slots between
// timesteps. At t=0 (or per-sample in image training) it runs on the
// learned seed slots; afterwards on the previous frame's refined slots.
// No positional encoding over the slot axis: slots are a set.
class TemporalSlotTransformer {
 public:
  TemporalSlotTransformer() = default;
  TemporalSlotTransformer(nn::ParamStore& ps, const TemporalConfig& cfg, int k, int d_slot, Rng& rng);

  // prev absent -> transformer applied to the learned seed slots.
  ad::Var propagate(const std::optional<ad::Var>& prev_slots) const;
  Tensor propagate_inference(const Tensor* prev_slots) const;

  const TemporalConfig& config() const { return cfg_; }
  const ad::Var& seed_slots() const { return seed_; }

 private:
  TemporalConfig cfg_;
  int k_ = 0, d_slot_ = 0;
  nn::TransformerLayer layer_;
  ad::Var seed_;
};

// Video path: slots_t = run_slot_attention(frame_t, init=propagate(slots_{t-1})).
// `on_init` (when set) observes each frame's initial slots; test hook.
std::vector<SlotSet> encode_video(const std::vector<FeatureGrid>& frames, const SlotAttention& sa,
                                  const TemporalSlotTransformer& temporal,
                                  const std::function<void(int, const Tensor&)>& on_init = nullptr);

}  // namespace slotbench
