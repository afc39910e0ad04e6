#pragma once

#include <utility>
#include <vector>

#include "memexplore/geometry.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

inline constexpr double kSuccessRadius = 1.0;  // meters

struct EpisodeState {
  Pose pose;
  int step = 0;
  int subtask_index = 0;
  /// (pose before the action, action) for every executed step.
  std::vector<std::pair<Pose, MoveAction>> trajectory;
  /// Set by Stop; the episode runner clears it when the next subtask begins.
  bool done = false;
};

/// Outcome of a Forward attempt: blocked iff any cell the 0.25 m segment
/// sweeps is occupied or the destination leaves the scene.
bool forward_blocked(const Scene& scene, const Pose& pose);

/// Executes one action. Blocked Forward leaves the pose unchanged but still
/// consumes the step. Throws ContractViolation when `state.done`.
EpisodeState step(const Scene& scene, const EpisodeState& state, MoveAction action);

/// In-place variant used by the episode loop.
void apply_step(const Scene& scene, EpisodeState& state, MoveAction action);

/// Euclidean distance to the goal <= 1 m (inclusive).
bool check_success(const Pose& pose, const Subtask& goal, double radius = kSuccessRadius);
inline bool check_success(const EpisodeState& state, const Subtask& goal,
                          double radius = kSuccessRadius) {
  return check_success(state.pose, goal, radius);
}

}  // namespace memexplore
