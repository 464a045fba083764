#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slotbench/encoder.hpp"
#include "slotbench/rng.hpp"

namespace slotbench {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

enum class SpriteShape { circle, square, triangle };

// Palette indices used across tasks. Targets carry task-fixed colors so the
// policy can ground "which object" visually.
enum Color : int {
  kRed = 0,
  kGreen = 1,
  kBlue = 2,
  kYellow = 3,
  kMagenta = 4,
  kCyan = 5,
  kOrange = 6,
};

struct ObjectState {
  SpriteShape shape = SpriteShape::circle;
  int color = 0;
  double radius_px = 6.0;
  Vec2 pos;
  bool held = false;
  bool distractor = false;
};

struct GoalRegion {
  Vec2 center;
  double radius = 0.07;
  int color = -1;  // tint for rendering; -1 = neutral
};

enum class ShiftKind { none, distractors, texture, lighting };

// Declarative visual shift. Applied to rendering only; dynamics never see it.
struct ShiftSpec {
  ShiftKind kind = ShiftKind::none;
  int distractor_count = 3;
  int texture_id = 100;       // held-out background patterns are >= 100
  double brightness = 0.6;    // lighting scale; training renders use exactly 1.0
  double gradient_amp = 0.8;  // lighting gradient amplitude
  double gradient_dir = 0.9;  // radians

  static ShiftSpec none_shift() { return ShiftSpec{}; }
};

struct TaskSpec {
  std::string id;
  int index = 0;
  int max_steps = 80;
  double goal_radius = 0.07;
  double stack_radius = 0.055;
  int hold_steps = 5;
};

struct WorldState {
  Vec2 gripper;
  double open_frac = 1.0;
  std::vector<ObjectState> objects;
  std::vector<GoalRegion> goals;
  int task_index = -1;
  int held_index = -1;
  int step_count = 0;
  int hold_streak = 0;
  int bg_texture_id = 0;  // training background pattern (ids 0..3)
  std::uint64_t seed = 0;
};

struct Action {
  double dx = 0.0, dy = 0.0, grip = 0.0;  // grip in [-1, 1]: negative closes

  Tensor to_tensor() const { return Tensor::from({1, 3}, {dx, dy, grip}); }
  static Action from_tensor(const Tensor& t) {
    if (t.size() != 3) throw ShapeError("action tensor must have 3 entries");
    return Action{t.data()[0], t.data()[1], t.data()[2]};
  }
};

// Environment constants (dynamics; not configurable — shifts never touch them).
namespace env_const {
constexpr int kImage = 64;
constexpr double kMaxStep = 0.05;
constexpr double kGripRate = 0.6;
constexpr double kGraspRadius = 0.06;
constexpr double kCloseThreshold = 0.5;
}  // namespace env_const

const std::vector<TaskSpec>& task_suite();
const TaskSpec& task_by_id(const std::string& id);

// Deterministic 2D manipulation environment on the unit arena. Rendering is
// pure CPU rasterization at 64x64 with 4x4 subsample coverage.
class SpriteEnv {
 public:
  SpriteEnv(TaskSpec task, ShiftSpec shift);

  struct Obs {
    Image image;
    Tensor proprio;  // (1,3): gripper x, y, open fraction
    int task_index = 0;
  };

  Obs reset(std::uint64_t seed);

  struct StepResult {
    Obs obs;
    bool success = false;
    bool done = false;
  };
  StepResult step(const Action& action);

  const WorldState& state() const { return state_; }
  const TaskSpec& task() const { return task_; }
  const ShiftSpec& shift() const { return shift_; }

  bool success_condition() const;  // instantaneous predicate (before streak)

 private:
  Obs observe() const;
  TaskSpec task_;
  ShiftSpec shift_;
  WorldState state_;
};

// Scripted waypoint expert: approach -> grasp -> transport -> release.
Action expert_action(const WorldState& state, const TaskSpec& task);

// Rasterize a state. `masks` (when non-null) receives one label per pixel:
// 0 = background (goal markers and the gripper included), i+1 = objects[i].
void render_scene(const WorldState& state, const ShiftSpec& shift, Image* img,
                  std::vector<int>* masks = nullptr);

// Task-free random scene for representation pretraining.
WorldState sample_pretrain_scene(Rng& rng);

// Serialization of the task-relevant state (gripper, non-distractor objects,
// counters); shifts must leave this trajectory untouched.
std::string task_state_fingerprint(const WorldState& state);

Tensor proprio_of(const WorldState& state);

}  // namespace slotbench
