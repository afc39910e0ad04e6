#pragma once

#include <optional>
#include <vector>

#include "memexplore/geometry.hpp"
#include "memexplore/scene.hpp"
#include "memexplore/simulator.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

struct PlanConfig {
  double success_radius = kSuccessRadius;
  double bucket_m = 0.1;         // poses closer than this (same bucket and heading) are merged
  int max_actions = 1 << 20;     // plans longer than this are not explored
  std::size_t max_expansions = 4'000'000;
};

/// Action sequence over the simulator's own motion model. poses[i] is the
/// pose before actions[i]; poses.back() is the final pose.
struct Plan {
  std::vector<MoveAction> actions;
  std::vector<Pose> poses;
  int forwards = 0;
  int turns = 0;

  double path_length() const { return forwards * kForwardStep; }
  std::size_t size() const { return actions.size(); }
};

/// A* over (0.1 m position bucket, heading) minimizing (forward steps, turns)
/// lexicographically. The target is the first pose within the success radius
/// from which the goal object is visible; poses inside the radius without
/// visibility are dead ends, since the episode would end there. Returns an
/// empty plan when the start already qualifies and nullopt when no plan
/// exists within the limits.
std::optional<Plan> plan_to_goal(const Scene& scene, const Pose& start, const Subtask& goal,
                                 const PlanConfig& cfg = {}, const ViewConfig& view_cfg = {});

}  // namespace memexplore
