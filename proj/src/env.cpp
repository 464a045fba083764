#include "slotbench/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slotbench {

namespace {

constexpr int kImg = env_const::kImage;

struct Rgb {
  double r, g, b;
};

const Rgb kPalette[7] = {
    {230, 60, 60},   // red
    {60, 205, 85},   // green
    {70, 115, 235},  // blue
    {235, 205, 60},  // yellow
    {205, 70, 205},  // magenta
    {70, 205, 205},  // cyan
    {240, 145, 50},  // orange
};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Integer pixel hash for procedural noise; stable across runs.
std::uint32_t pixel_hash(int x, int y, int salt) {
  std::uint32_t h = static_cast<std::uint32_t>(x * 374761393 + y * 668265263 + salt * 2246822519u);
  h = (h ^ (h >> 13)) * 1274126177u;
  return h ^ (h >> 16);
}

// Background patterns. Ids 0..3 form the training set (dark, low contrast);
// ids >= 100 are the held-out shift set.
Rgb background_color(int id, int x, int y) {
  switch (id) {
    case 0: return {26, 28, 32};
    case 1: {
      const double t = static_cast<double>(y) / kImg;
      return {20 + 16 * t, 22 + 16 * t, 28 + 16 * t};
    }
    case 2: {
      const bool c = ((x / 16) + (y / 16)) % 2 == 0;
      return c ? Rgb{24, 26, 30} : Rgb{32, 34, 38};
    }
    case 3: {
      const double n = static_cast<double>(pixel_hash(x, y, 3) & 0xff) / 255.0 * 12.0 - 6.0;
      return {28 + n, 30 + n, 34 + n};
    }
    case 100: {
      const bool s = (y / 8) % 2 == 0;
      return s ? Rgb{58, 46, 76} : Rgb{18, 14, 24};
    }
    case 101: {
      const bool s = ((x + y) / 10) % 2 == 0;
      return s ? Rgb{22, 48, 42} : Rgb{48, 26, 20};
    }
    case 102: {
      const bool c = ((x / 8) + (y / 8)) % 2 == 0;
      return c ? Rgb{52, 52, 22} : Rgb{16, 16, 46};
    }
    case 103: {
      const double n = static_cast<double>(pixel_hash(x, y, 103) & 0xff) / 255.0 * 50.0 - 25.0;
      return {42 + n, 36 + n, 32 + n};
    }
    case 104: {
      const double cx = x - kImg / 2.0, cy = y - kImg / 2.0;
      const bool ring = (static_cast<int>(std::sqrt(cx * cx + cy * cy)) / 6) % 2 == 0;
      return ring ? Rgb{46, 22, 46} : Rgb{16, 36, 16};
    }
    default:
      throw InvalidInput("unknown texture id " + std::to_string(id));
  }
}

bool inside_shape(const ObjectState& o, double px, double py) {
  const double cx = o.pos.x * kImg;
  const double cy = o.pos.y * kImg;
  const double r = o.radius_px;
  const double dx = px - cx, dy = py - cy;
  switch (o.shape) {
    case SpriteShape::circle:
      return dx * dx + dy * dy <= r * r;
    case SpriteShape::square:
      return std::max(std::abs(dx), std::abs(dy)) <= 0.9 * r;
    case SpriteShape::triangle: {
      // Upward triangle: apex (0,-r), base corners (+-0.95r, +0.75r).
      const double ax = 0.0, ay = -r;
      const double bx = -0.95 * r, by = 0.75 * r;
      const double cx2 = 0.95 * r, cy2 = 0.75 * r;
      auto side = [](double x1, double y1, double x2, double y2, double x, double y) {
        return (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
      };
      const double s1 = side(ax, ay, bx, by, dx, dy);
      const double s2 = side(bx, by, cx2, cy2, dx, dy);
      const double s3 = side(cx2, cy2, ax, ay, dx, dy);
      return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
    }
  }
  return false;
}

// Fraction of a pixel covered by the shape, 4x4 subsamples.
double coverage_of(const ObjectState& o, int x, int y) {
  const double cx = o.pos.x * kImg, cy = o.pos.y * kImg;
  const double reach = o.radius_px + 1.5;
  if (x + 1.0 < cx - reach || x > cx + reach || y + 1.0 < cy - reach || y > cy + reach) return 0.0;
  int hits = 0;
  for (int sy = 0; sy < 4; ++sy)
    for (int sx = 0; sx < 4; ++sx)
      if (inside_shape(o, x + (sx + 0.5) / 4.0, y + (sy + 0.5) / 4.0)) ++hits;
  return hits / 16.0;
}

struct Bar {
  double cx, cy, hw, hh;  // center and half extents, pixels
};

double bar_coverage(const Bar& b, int x, int y) {
  if (x + 1.0 < b.cx - b.hw - 1 || x > b.cx + b.hw + 1 || y + 1.0 < b.cy - b.hh - 1 || y > b.cy + b.hh + 1)
    return 0.0;
  int hits = 0;
  for (int sy = 0; sy < 4; ++sy)
    for (int sx = 0; sx < 4; ++sx) {
      const double px = x + (sx + 0.5) / 4.0, py = y + (sy + 0.5) / 4.0;
      if (std::abs(px - b.cx) <= b.hw && std::abs(py - b.cy) <= b.hh) ++hits;
    }
  return hits / 16.0;
}

std::vector<TaskSpec> make_suite() {
  TaskSpec push{"push-block", 0, 80, 0.07, 0.055, 5};
  TaskSpec pick{"pick-place", 1, 80, 0.07, 0.055, 5};
  TaskSpec stack{"stack-two", 2, 80, 0.07, 0.055, 5};
  TaskSpec sort{"sort-colors", 3, 160, 0.08, 0.055, 5};
  return {push, pick, stack, sort};
}

Vec2 sample_position(Rng& rng, const std::vector<Vec2>& avoid, double min_dist) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    Vec2 p{rng.uniform(0.14, 0.86), rng.uniform(0.14, 0.86)};
    bool ok = true;
    for (const auto& a : avoid)
      if (dist(p, a) < min_dist) ok = false;
    if (ok) return p;
  }
  // Fully deterministic fallback; practically unreachable with our counts.
  return Vec2{0.5, 0.5};
}

SpriteShape sample_shape(Rng& rng) { return static_cast<SpriteShape>(rng.below(3)); }

ObjectState make_object(Rng& rng, int color, double r_lo, double r_hi, Vec2 pos) {
  ObjectState o;
  o.shape = sample_shape(rng);
  o.color = color;
  o.radius_px = rng.uniform(r_lo, r_hi);
  o.pos = pos;
  return o;
}

}  // namespace

const std::vector<TaskSpec>& task_suite() {
  static const std::vector<TaskSpec> suite = make_suite();
  return suite;
}

const TaskSpec& task_by_id(const std::string& id) {
  for (const auto& t : task_suite())
    if (t.id == id) return t;
  throw InvalidInput("unknown task id `" + id + "`");
}

Tensor proprio_of(const WorldState& state) {
  return Tensor::from({1, 3}, {state.gripper.x, state.gripper.y, state.open_frac});
}

SpriteEnv::SpriteEnv(TaskSpec task, ShiftSpec shift) : task_(std::move(task)), shift_(shift) {
  if (shift_.kind == ShiftKind::texture && shift_.texture_id < 100)
    throw ConfigError("texture shift requires a held-out pattern id (>= 100)");
  if (shift_.kind == ShiftKind::lighting && shift_.brightness == 1.0 && shift_.gradient_amp == 0.0)
    throw ConfigError("lighting shift must differ from the training setting");
}

SpriteEnv::Obs SpriteEnv::reset(std::uint64_t seed) {
  // Layout and shift sampling use decoupled streams so the task-relevant
  // state is identical across all ShiftSpecs for a fixed seed.
  Rng layout = Rng::derive(seed, 1);
  Rng shift_rng = Rng::derive(seed, 2);

  state_ = WorldState{};
  state_.seed = seed;
  state_.task_index = task_.index;
  state_.open_frac = 1.0;
  state_.bg_texture_id = static_cast<int>(layout.below(4));

  std::vector<Vec2> occupied;
  auto place = [&](double min_from_goals) {
    std::vector<Vec2> avoid = occupied;
    for (const auto& g : state_.goals) avoid.push_back(g.center);
    Vec2 p = sample_position(layout, avoid, std::max(0.16, min_from_goals));
    occupied.push_back(p);
    return p;
  };

  if (task_.id == "push-block") {
    state_.goals.push_back({{0.80, 0.78}, task_.goal_radius, -1});
    state_.objects.push_back(make_object(layout, kOrange, 5.5, 7.0, place(0.20)));
    const int bystander_colors[4] = {kGreen, kYellow, kMagenta, kCyan};
    state_.objects.push_back(
        make_object(layout, bystander_colors[layout.below(4)], 4.5, 6.5, place(0.16)));
  } else if (task_.id == "pick-place") {
    state_.goals.push_back({{0.22, 0.80}, task_.goal_radius, -1});
    state_.objects.push_back(make_object(layout, kGreen, 5.5, 7.0, place(0.20)));
    const int bystander_colors[4] = {kYellow, kMagenta, kCyan, kOrange};
    state_.objects.push_back(
        make_object(layout, bystander_colors[layout.below(4)], 4.5, 6.5, place(0.16)));
  } else if (task_.id == "stack-two") {
    state_.objects.push_back(make_object(layout, kYellow, 5.0, 6.5, place(0.0)));
    state_.objects.push_back(make_object(layout, kMagenta, 6.5, 8.0, place(0.0)));
  } else if (task_.id == "sort-colors") {
    state_.goals.push_back({{0.16, 0.84}, task_.goal_radius, kRed});
    state_.goals.push_back({{0.84, 0.84}, task_.goal_radius, kBlue});
    state_.objects.push_back(make_object(layout, kRed, 5.0, 6.5, place(0.20)));
    state_.objects.push_back(make_object(layout, kBlue, 5.0, 6.5, place(0.20)));
  } else {
    throw InvalidInput("unknown task id `" + task_.id + "`");
  }

  state_.gripper = sample_position(layout, occupied, 0.10);

  if (shift_.kind == ShiftKind::distractors) {
    // Distractors never reuse the task's target colors and never interact.
    std::vector<int> banned;
    for (const auto& o : state_.objects) banned.push_back(o.color);
    std::vector<int> pool;
    for (int c = 0; c < 7; ++c)
      if (std::find(banned.begin(), banned.end(), c) == banned.end()) pool.push_back(c);
    for (int i = 0; i < shift_.distractor_count; ++i) {
      std::vector<Vec2> avoid = occupied;
      for (const auto& g : state_.goals) avoid.push_back(g.center);
      Vec2 p = sample_position(shift_rng, avoid, 0.13);
      ObjectState d = make_object(shift_rng, pool[shift_rng.below(pool.size())], 4.0, 6.0, p);
      d.distractor = true;
      state_.objects.push_back(d);
    }
  }

  return observe();
}

bool SpriteEnv::success_condition() const {
  const auto& st = state_;
  if (task_.id == "push-block") {
    return dist(st.objects[0].pos, st.goals[0].center) <= task_.goal_radius;
  }
  if (task_.id == "pick-place") {
    return dist(st.objects[0].pos, st.goals[0].center) <= task_.goal_radius && !st.objects[0].held;
  }
  if (task_.id == "stack-two") {
    return dist(st.objects[0].pos, st.objects[1].pos) <= task_.stack_radius && !st.objects[0].held;
  }
  if (task_.id == "sort-colors") {
    return dist(st.objects[0].pos, st.goals[0].center) <= task_.goal_radius && !st.objects[0].held &&
           dist(st.objects[1].pos, st.goals[1].center) <= task_.goal_radius && !st.objects[1].held;
  }
  return false;
}

SpriteEnv::StepResult SpriteEnv::step(const Action& action) {
  using namespace env_const;
  if (!std::isfinite(action.dx) || !std::isfinite(action.dy) || !std::isfinite(action.grip))
    throw NumericError("non-finite action");
  auto& st = state_;
  const double dx = std::clamp(action.dx, -kMaxStep, kMaxStep);
  const double dy = std::clamp(action.dy, -kMaxStep, kMaxStep);
  st.gripper.x = clamp01(st.gripper.x + dx);
  st.gripper.y = clamp01(st.gripper.y + dy);
  const double grip = std::clamp(action.grip, -1.0, 1.0);
  st.open_frac = clamp01(st.open_frac + kGripRate * grip);
  const bool now_closed = st.open_frac < kCloseThreshold;

  if (st.held_index >= 0 && !now_closed) {
    st.objects[st.held_index].held = false;
    st.held_index = -1;
  }
  if (st.held_index < 0 && now_closed) {
    int best = -1;
    double best_d = kGraspRadius;
    for (std::size_t i = 0; i < st.objects.size(); ++i) {
      if (st.objects[i].distractor) continue;
      const double d = dist(st.objects[i].pos, st.gripper);
      if (d <= best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      st.held_index = best;
      st.objects[best].held = true;
    }
  }
  if (st.held_index >= 0) st.objects[st.held_index].pos = st.gripper;

  st.step_count += 1;
  if (success_condition())
    st.hold_streak += 1;
  else
    st.hold_streak = 0;

  StepResult res;
  res.success = st.hold_streak >= task_.hold_steps;
  res.done = res.success || st.step_count >= task_.max_steps;
  res.obs = observe();
  return res;
}

SpriteEnv::Obs SpriteEnv::observe() const {
  Obs o;
  render_scene(state_, shift_, &o.image);
  o.proprio = proprio_of(state_);
  o.task_index = task_.index;
  return o;
}

// ---- scripted expert ---------------------------------------------------------

namespace {

Action move_toward(const Vec2& from, const Vec2& to, double grip_cmd) {
  Action a;
  a.dx = std::clamp(to.x - from.x, -env_const::kMaxStep, env_const::kMaxStep);
  a.dy = std::clamp(to.y - from.y, -env_const::kMaxStep, env_const::kMaxStep);
  a.grip = grip_cmd;
  return a;
}

// Move object `idx` to `target` within `tol`; release there unless
// `keep_hold`. Returns no-op when already satisfied.
Action ferry_object(const WorldState& st, int idx, const Vec2& target, double tol, bool keep_hold) {
  const ObjectState& obj = st.objects[static_cast<std::size_t>(idx)];
  const bool holding_it = st.held_index == idx;
  if (holding_it) {
    if (dist(obj.pos, target) > tol) return move_toward(st.gripper, target, -1.0);
    return keep_hold ? Action{0.0, 0.0, -1.0} : Action{0.0, 0.0, 1.0};  // settle or release
  }
  if (st.held_index >= 0) return Action{0.0, 0.0, 1.0};  // holding the wrong object
  if (dist(obj.pos, target) <= tol) return Action{0.0, 0.0, 0.0};      // already there
  if (dist(st.gripper, obj.pos) > 0.015) return move_toward(st.gripper, obj.pos, 1.0);
  return Action{0.0, 0.0, -1.0};  // close on it
}

}  // namespace

Action expert_action(const WorldState& st, const TaskSpec& task) {
  if (st.task_index != task.index) throw InvalidInput("state does not belong to task " + task.id);
  for (const auto& o : st.objects)
    if (!o.distractor && (o.pos.x < 0.0 || o.pos.x > 1.0 || o.pos.y < 0.0 || o.pos.y > 1.0))
      throw InvalidInput("expert cannot solve: object out of arena");

  if (task.id == "push-block")
    return ferry_object(st, 0, st.goals[0].center, 0.4 * task.goal_radius, /*keep_hold=*/true);
  if (task.id == "pick-place")
    return ferry_object(st, 0, st.goals[0].center, 0.4 * task.goal_radius, /*keep_hold=*/false);
  if (task.id == "stack-two")
    return ferry_object(st, 0, st.objects[1].pos, 0.5 * task.stack_radius, /*keep_hold=*/false);
  if (task.id == "sort-colors") {
    const bool red_done =
        dist(st.objects[0].pos, st.goals[0].center) <= 0.6 * task.goal_radius && !st.objects[0].held;
    if (!red_done) return ferry_object(st, 0, st.goals[0].center, 0.4 * task.goal_radius, false);
    return ferry_object(st, 1, st.goals[1].center, 0.4 * task.goal_radius, false);
  }
  throw InvalidInput("unknown task id `" + task.id + "`");
}

// ---- rendering ----------------------------------------------------------------

void render_scene(const WorldState& state, const ShiftSpec& shift, Image* img, std::vector<int>* masks) {
  if (img) *img = Image(kImg, kImg);
  if (masks) masks->assign(static_cast<std::size_t>(kImg) * kImg, 0);

  const int tex_id = shift.kind == ShiftKind::texture ? shift.texture_id : state.bg_texture_id;
  const double light_scale = shift.kind == ShiftKind::lighting ? shift.brightness : 1.0;
  const double light_amp = shift.kind == ShiftKind::lighting ? shift.gradient_amp : 0.0;
  const double gx = std::cos(shift.gradient_dir), gy = std::sin(shift.gradient_dir);

  for (int y = 0; y < kImg; ++y) {
    for (int x = 0; x < kImg; ++x) {
      Rgb c = background_color(tex_id, x, y);

      // Goal markers: translucent tinted disks under everything else.
      for (const auto& g : state.goals) {
        const double d = std::hypot((x + 0.5) / kImg - g.center.x, (y + 0.5) / kImg - g.center.y);
        if (d <= g.radius) {
          const Rgb tint = g.color >= 0 ? kPalette[g.color] : Rgb{150, 150, 150};
          c = {c.r + 0.32 * (tint.r - c.r), c.g + 0.32 * (tint.g - c.g), c.b + 0.32 * (tint.b - c.b)};
        }
      }

      // Painter's order: distractors under task objects, gripper on top.
      int label = 0;
      auto blend_object = [&](const ObjectState& o, int obj_label) {
        const double cov = coverage_of(o, x, y);
        if (cov <= 0.0) return;
        const Rgb col = kPalette[o.color];
        c = {c.r + cov * (col.r - c.r), c.g + cov * (col.g - c.g), c.b + cov * (col.b - c.b)};
        if (cov >= 0.5) label = obj_label;
      };
      for (std::size_t i = 0; i < state.objects.size(); ++i)
        if (state.objects[i].distractor) blend_object(state.objects[i], static_cast<int>(i) + 1);
      for (std::size_t i = 0; i < state.objects.size(); ++i)
        if (!state.objects[i].distractor) blend_object(state.objects[i], static_cast<int>(i) + 1);

      // Gripper claw: two bars whose gap tracks the open fraction.
      const double gap = 2.5 + 2.5 * state.open_frac;
      const double gcx = state.gripper.x * kImg, gcy = state.gripper.y * kImg;
      for (const double side : {-1.0, 1.0}) {
        const Bar bar{gcx + side * gap, gcy, 1.0, 3.5};
        const double cov = bar_coverage(bar, x, y);
        if (cov > 0.0) c = {c.r + cov * (245 - c.r), c.g + cov * (245 - c.g), c.b + cov * (245 - c.b)};
      }

      const double b =
          light_scale + light_amp * (gx * ((x + 0.5) / kImg - 0.5) + gy * ((y + 0.5) / kImg - 0.5));
      const double lum = std::max(0.05, b);
      if (img) {
        img->at(y, x, 0) = static_cast<std::uint8_t>(std::clamp(c.r * lum, 0.0, 255.0));
        img->at(y, x, 1) = static_cast<std::uint8_t>(std::clamp(c.g * lum, 0.0, 255.0));
        img->at(y, x, 2) = static_cast<std::uint8_t>(std::clamp(c.b * lum, 0.0, 255.0));
      }
      if (masks) (*masks)[static_cast<std::size_t>(y) * kImg + x] = label;
    }
  }
}

WorldState sample_pretrain_scene(Rng& rng) {
  WorldState st;
  st.task_index = -1;
  st.bg_texture_id = static_cast<int>(rng.below(4));
  st.open_frac = rng.uniform(0.0, 1.0);
  const int count = 2 + static_cast<int>(rng.below(4));  // 2..5 objects
  std::vector<Vec2> occupied;
  for (int i = 0; i < count; ++i) {
    Vec2 p = sample_position(rng, occupied, 0.16);
    occupied.push_back(p);
    st.objects.push_back(make_object(rng, static_cast<int>(rng.below(7)), 4.5, 7.5, p));
  }
  st.gripper = sample_position(rng, occupied, 0.10);
  return st;
}

std::string task_state_fingerprint(const WorldState& state) {
  std::ostringstream out;
  out.precision(17);
  out << state.task_index << '|' << state.gripper.x << ',' << state.gripper.y << ',' << state.open_frac
      << '|' << state.held_index << '|' << state.step_count << '|' << state.hold_streak << '|';
  for (const auto& o : state.objects) {
    if (o.distractor) continue;
    out << static_cast<int>(o.shape) << ',' << o.color << ',' << o.radius_px << ',' << o.pos.x << ','
        << o.pos.y << ',' << o.held << ';';
  }
  return out.str();
}

}  // namespace slotbench
