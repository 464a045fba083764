#include "slotbench/trajectory.hpp"

#include "slotbench/io.hpp"

namespace slotbench {

namespace {
constexpr char kMagic[4] = {'S', 'B', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_trajectory_archive(const std::string& path, const std::vector<Episode>& episodes,
                              bool with_masks) {
  ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(episodes.size()));
  w.u32(env_const::kImage);  // H
  w.u32(env_const::kImage);  // W
  w.u32(3);                  // proprio dim
  w.u32(3);                  // action dim
  w.u8(with_masks ? 1 : 0);
  for (const auto& ep : episodes) {
    w.str(ep.task_id);
    w.u32(static_cast<std::uint32_t>(ep.steps.size()));
    for (const auto& s : ep.steps) {
      if (s.image.height != env_const::kImage || s.image.width != env_const::kImage)
        throw ShapeError("trajectory step image must be 64x64");
      if (s.proprio.size() != 3 || s.action.size() != 3)
        throw ShapeError("trajectory step proprio/action must have 3 entries");
      w.bytes(s.image.rgb.data(), s.image.rgb.size());
      for (float v : s.proprio) w.f32(v);
      for (float v : s.action) w.f32(v);
      w.u8(s.success ? 1 : 0);
      if (with_masks) {
        if (s.masks.size() != s.image.rgb.size() / 3)
          throw ShapeError("mask grid size does not match image");
        for (int m : s.masks) w.u8(static_cast<std::uint8_t>(m));
      }
    }
  }
  atomic_write(path, w);
}

std::vector<Episode> read_trajectory_archive(const std::string& path) {
  ByteReader r(read_file(path));
  r.expect_magic(kMagic, "trajectory archive");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError("unsupported trajectory archive version " + std::to_string(version), r.offset() - 4);
  const std::uint32_t count = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint32_t ww = r.u32();
  const std::uint32_t proprio_dim = r.u32();
  const std::uint32_t action_dim = r.u32();
  const bool with_masks = r.u8() != 0;
  std::vector<Episode> episodes;
  episodes.reserve(count);
  for (std::uint32_t e = 0; e < count; ++e) {
    Episode ep;
    ep.task_id = r.str();
    const std::uint32_t steps = r.u32();
    ep.steps.reserve(steps);
    for (std::uint32_t t = 0; t < steps; ++t) {
      TrajectoryStep s;
      s.image = Image(static_cast<int>(h), static_cast<int>(ww));
      r.need(s.image.rgb.size(), "episode " + std::to_string(e) + " step image");
      r.bytes(s.image.rgb.data(), s.image.rgb.size());
      s.proprio.resize(proprio_dim);
      for (auto& v : s.proprio) v = r.f32();
      s.action.resize(action_dim);
      for (auto& v : s.action) v = r.f32();
      s.success = r.u8() != 0;
      if (with_masks) {
        s.masks.resize(static_cast<std::size_t>(h) * ww);
        for (auto& m : s.masks) m = r.u8();
      }
      ep.steps.push_back(std::move(s));
    }
    episodes.push_back(std::move(ep));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last episode", r.offset());
  return episodes;
}

}  // namespace slotbench
