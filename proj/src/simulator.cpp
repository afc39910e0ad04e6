#include "memexplore/simulator.hpp"

#include "memexplore/error.hpp"

namespace memexplore {

bool forward_blocked(const Scene& scene, const Pose& pose) {
  const Pose next = advance(pose);
  if (!scene.in_bounds(next.x, next.y)) {
    return true;
  }
  return !for_each_cell_on_segment(pose.x, pose.y, next.x, next.y, scene.cell_size(),
                                   [&](const Cell& c) { return scene.is_free(c); });
}

void apply_step(const Scene& scene, EpisodeState& state, MoveAction action) {
  if (state.done) {
    throw ContractViolation("step: episode subtask already finished (done)");
  }
  state.trajectory.emplace_back(state.pose, action);
  switch (action) {
    case MoveAction::Forward:
      if (!forward_blocked(scene, state.pose)) {
        state.pose = advance(state.pose);
      }
      break;
    case MoveAction::TurnLeft:
    case MoveAction::TurnRight:
      state.pose = rotate(state.pose, action);
      break;
    case MoveAction::Stop:
      state.done = true;
      break;
  }
  ++state.step;
}

EpisodeState step(const Scene& scene, const EpisodeState& state, MoveAction action) {
  EpisodeState next = state;
  apply_step(scene, next, action);
  return next;
}

bool check_success(const Pose& pose, const Subtask& goal, double radius) {
  return euclidean(pose.x, pose.y, goal.goal_pose.x, goal.goal_pose.y) <= radius;
}

}  // namespace memexplore
