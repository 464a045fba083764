#pragma once

#include <string>
#include <vector>

#include "slotbench/env.hpp"

namespace slotbench {

struct TrajectoryStep {
  Image image;
  std::vector<float> proprio;  // gripper x, y, open fraction
  std::vector<float> action;
  bool success = false;
  std::vector<int> masks;  // optional ground-truth labels, empty unless recorded
};

struct Episode {
  std::string task_id;
  std::vector<TrajectoryStep> steps;
};

// Trajectory Archive ("SBTR"): expert demos and recorded rollouts.
void write_trajectory_archive(const std::string& path, const std::vector<Episode>& episodes,
                              bool with_masks);
std::vector<Episode> read_trajectory_archive(const std::string& path);

}  // namespace slotbench
