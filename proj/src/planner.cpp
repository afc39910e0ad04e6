#include "memexplore/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace memexplore {

namespace {

struct Node {
  Pose pose;
  int forwards = 0;
  int turns = 0;
  int parent = -1;
  MoveAction via = MoveAction::Stop;
};

struct Open {
  int f_forwards;
  int turns;
  int g_forwards;
  int node;
};

struct OpenOrder {
  bool operator()(const Open& a, const Open& b) const {
    if (a.f_forwards != b.f_forwards) {
      return a.f_forwards > b.f_forwards;
    }
    if (a.turns != b.turns) {
      return a.turns > b.turns;
    }
    if (a.g_forwards != b.g_forwards) {
      return a.g_forwards < b.g_forwards;
    }
    return a.node > b.node;
  }
};

int heading_index(double heading) {
  return static_cast<int>(std::lround(normalize_heading(heading) / kTurnStep)) % 12;
}

}  // namespace

std::optional<Plan> plan_to_goal(const Scene& scene, const Pose& start, const Subtask& goal,
                                 const PlanConfig& cfg, const ViewConfig& view_cfg) {
  SceneObject target;
  if (const auto* obj = scene.find_object(goal.goal_tag)) {
    target = *obj;
  } else {
    target.tag = goal.goal_tag;
    target.pose = goal.goal_pose;
  }
  auto within = [&](const Pose& p) {
    return euclidean(p.x, p.y, goal.goal_pose.x, goal.goal_pose.y) <= cfg.success_radius;
  };
  auto terminal = [&](const Pose& p) { return within(p) && is_visible(scene, p, target, view_cfg); };
  auto heuristic = [&](const Pose& p) {
    const double d = euclidean(p.x, p.y, goal.goal_pose.x, goal.goal_pose.y) - cfg.success_radius;
    return d <= 0.0 ? 0 : static_cast<int>(std::ceil(d / kForwardStep - 1e-9));
  };
  // Poses never leave the scene, so buckets index a flat table.
  const long long bw = static_cast<long long>(std::ceil(scene.width() * scene.cell_size() / cfg.bucket_m)) + 1;
  const long long bh = static_cast<long long>(std::ceil(scene.height() * scene.cell_size() / cfg.bucket_m)) + 1;
  auto key = [&](const Pose& p) {
    const auto bx = std::clamp(static_cast<long long>(std::floor(p.x / cfg.bucket_m)), 0LL, bw - 1);
    const auto by = std::clamp(static_cast<long long>(std::floor(p.y / cfg.bucket_m)), 0LL, bh - 1);
    return static_cast<std::size_t>(((by * bw + bx) * 12LL) + heading_index(p.heading));
  };

  std::vector<Node> nodes;
  std::vector<bool> is_goal;
  std::vector<int> best(static_cast<std::size_t>(bw * bh * 12), -1);  // node with the best cost pushed so far
  std::vector<bool> closed(best.size(), false);
  std::priority_queue<Open, std::vector<Open>, OpenOrder> open;

  nodes.push_back(Node{start});
  is_goal.push_back(terminal(start));
  best[key(start)] = 0;
  open.push(Open{heuristic(start), 0, 0, 0});

  int found = -1;
  std::size_t expansions = 0;
  while (!open.empty()) {
    const Open top = open.top();
    open.pop();
    const Node cur = nodes[static_cast<std::size_t>(top.node)];
    const std::size_t k = key(cur.pose);
    if (closed[k]) {
      continue;
    }
    closed[k] = true;
    if (is_goal[static_cast<std::size_t>(top.node)]) {
      found = top.node;
      break;
    }
    if (++expansions > cfg.max_expansions) {
      break;
    }
    if (cur.forwards + cur.turns >= cfg.max_actions) {
      continue;
    }
    for (MoveAction a : {MoveAction::Forward, MoveAction::TurnLeft, MoveAction::TurnRight}) {
      Node next = cur;
      next.parent = top.node;
      next.via = a;
      if (a == MoveAction::Forward) {
        if (forward_blocked(scene, cur.pose)) {
          continue;
        }
        next.pose = advance(cur.pose);
        ++next.forwards;
      } else {
        next.pose = rotate(cur.pose, a);
        ++next.turns;
      }
      const bool goal_here = terminal(next.pose);
      if (!goal_here && within(next.pose)) {
        continue;
      }
      const int h = heuristic(next.pose);
      if (next.forwards + next.turns + h > cfg.max_actions) {
        continue;
      }
      const std::size_t nk = key(next.pose);
      if (closed[nk]) {
        continue;
      }
      if (best[nk] >= 0) {
        const Node& old = nodes[static_cast<std::size_t>(best[nk])];
        if (std::pair(old.forwards, old.turns) <= std::pair(next.forwards, next.turns)) {
          continue;
        }
      }
      const int id = static_cast<int>(nodes.size());
      nodes.push_back(next);
      is_goal.push_back(goal_here);
      best[nk] = id;
      open.push(Open{next.forwards + h, next.turns, next.forwards, id});
    }
  }
  if (found < 0) {
    return std::nullopt;
  }

  Plan plan;
  std::vector<int> chain;
  for (int n = found; n >= 0; n = nodes[static_cast<std::size_t>(n)].parent) {
    chain.push_back(n);
  }
  std::reverse(chain.begin(), chain.end());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Node& n = nodes[static_cast<std::size_t>(chain[i])];
    plan.poses.push_back(n.pose);
    if (i > 0) {
      plan.actions.push_back(n.via);
    }
  }
  const Node& last = nodes[static_cast<std::size_t>(found)];
  plan.forwards = last.forwards;
  plan.turns = last.turns;
  return plan;
}

}  // namespace memexplore
