#include "memexplore/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memexplore/embedding.hpp"
#include "memexplore/error.hpp"
#include "memexplore/protocol.hpp"

namespace memexplore {

AgentResponse act_response(std::optional<MoveAction> action, std::optional<int> frontier,
                           std::optional<std::string> answer) {
  return parse_response(format_response(action, frontier, answer));
}

AgentResponse tool_response(std::string_view query) { return parse_response(format_tool_call(query)); }

std::uint64_t episode_seed(std::uint64_t run_seed, std::string_view task_id) {
  std::uint64_t z = run_seed ^ fnv1a64(task_id);
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string default_answer(const QuestionInfo& q) {
  if (q.format == AnswerFormat::Choice && !q.choices.empty()) {
    return q.choices.front();
  }
  return "unknown";
}

namespace {

constexpr MoveAction kMoves[3] = {MoveAction::Forward, MoveAction::TurnLeft, MoveAction::TurnRight};

}  // namespace

AgentResponse RandomPolicy::decide(const StepRequest& request) {
  if (request.type == RequestType::QA) {
    return act_response(std::nullopt, std::nullopt, default_answer(*request.question));
  }
  const MoveAction a = kMoves[rng_() % 3];
  std::optional<int> frontier;
  if (!request.frontiers.empty()) {
    frontier = request.frontiers[rng_() % request.frontiers.size()].id;
  }
  return act_response(a, frontier);
}

void GreedyFrontierPolicy::begin_episode(const EpisodeContext& ctx) {
  rng_.seed(ctx.seed);
  last_pose_.reset();
  last_action_.reset();
}

MoveAction GreedyFrontierPolicy::steer(double beta) {
  beta = normalize_signed(beta);
  if (std::abs(beta) <= 15.0) {
    return MoveAction::Forward;
  }
  return beta > 0.0 ? MoveAction::TurnLeft : MoveAction::TurnRight;
}

AgentResponse GreedyFrontierPolicy::decide(const StepRequest& request) {
  if (request.type == RequestType::QA) {
    return act_response(std::nullopt, std::nullopt, default_answer(*request.question));
  }
  const bool blocked = last_action_ == MoveAction::Forward && last_pose_ && *last_pose_ == request.pose;

  std::optional<double> goal_bearing;
  for (const auto& view : request.views) {
    for (const auto& obj : view.visible) {
      if (obj.tag == request.target) {
        goal_bearing = -obj.bearing;
        break;
      }
    }
    if (goal_bearing) {
      break;
    }
  }

  const FrontierInfo* best = nullptr;
  for (const auto& f : request.frontiers) {
    if (best == nullptr) {
      best = &f;
      continue;
    }
    const bool f_known = f.geodesic >= 0.0;
    const bool b_known = best->geodesic >= 0.0;
    const double fd = f_known ? f.geodesic : f.distance;
    const double bd = b_known ? best->geodesic : best->distance;
    if ((f_known && !b_known) || (f_known == b_known && (fd < bd || (fd == bd && f.id < best->id)))) {
      best = &f;
    }
  }

  MoveAction a;
  if (blocked) {
    a = rng_() % 2 == 0 ? MoveAction::TurnLeft : MoveAction::TurnRight;
  } else if (goal_bearing) {
    a = steer(*goal_bearing);
  } else if (best != nullptr) {
    a = steer(best->steering_bearing);
  } else {
    a = kMoves[rng_() % 3];
  }
  last_pose_ = request.pose;
  last_action_ = a;
  return act_response(a, best ? std::optional<int>(best->id) : std::nullopt);
}

void OraclePolicy::begin_episode(const EpisodeContext& ctx) {
  scene_ = ctx.scene;
  task_ = ctx.task;
  view_cfg_ = ctx.config.views;
  plan_.reset();
  plan_subtask_ = -1;
  cursor_ = 0;
}

AgentResponse OraclePolicy::decide(const StepRequest& request) {
  if (scene_ == nullptr || task_ == nullptr) {
    throw ContractViolation("oracle policy: begin_episode was not called");
  }
  return request.type == RequestType::QA ? answer(request) : navigate(request);
}

AgentResponse OraclePolicy::navigate(const StepRequest& request) {
  const auto& goal = task_->subtasks.at(static_cast<std::size_t>(request.subtask_index));
  const bool on_plan = plan_ && plan_subtask_ == request.subtask_index && cursor_ < plan_->poses.size() &&
                       plan_->poses[cursor_] == request.pose;
  if (!on_plan) {
    plan_ = plan_to_goal(*scene_, request.pose, goal, PlanConfig{}, view_cfg_);
    plan_subtask_ = request.subtask_index;
    cursor_ = 0;
  }
  if (!plan_ || cursor_ >= plan_->actions.size()) {
    return act_response(MoveAction::Stop, std::nullopt);
  }
  return act_response(plan_->actions[cursor_++], std::nullopt);
}

AgentResponse OraclePolicy::answer(const StepRequest& request) {
  const QuestionInfo& q = *request.question;
  if (!use_memory_) {
    return act_response(std::nullopt, std::nullopt, default_answer(q));
  }
  const auto& item = task_->questions.at(static_cast<std::size_t>(q.index));
  if (request.round == 1) {
    std::string query = item.goal_tag;
    std::replace(query.begin(), query.end(), '_', ' ');
    return tool_response(query);
  }
  std::vector<std::string> captions;
  if (request.memories) {
    for (const auto& m : *request.memories) {
      captions.push_back(m.caption);
    }
  }
  auto found = answer_from_captions(captions, item.goal_tag, q.qtype);
  if (!found) {
    return act_response(std::nullopt, std::nullopt, default_answer(q));
  }
  if (q.format == AnswerFormat::Choice &&
      std::find(q.choices.begin(), q.choices.end(), *found) == q.choices.end()) {
    return act_response(std::nullopt, std::nullopt, default_answer(q));
  }
  return act_response(std::nullopt, std::nullopt, *found);
}

std::vector<VisibleObject> parse_caption(std::string_view caption) {
  std::vector<VisibleObject> out;
  std::size_t pos = 0;
  while (pos <= caption.size()) {
    std::size_t end = caption.find("; ", pos);
    if (end == std::string_view::npos) {
      end = caption.size();
    }
    const std::string seg(caption.substr(pos, end - pos));
    pos = end + 2;
    // "<color> <tag> (<state>, x<count>) in <region> at <d> m bearing <b>"
    const auto sp = seg.find(' ');
    const auto open = seg.find(" (");
    const auto comma = seg.find(", x", open == std::string::npos ? 0 : open);
    const auto close = seg.find(") in ", comma == std::string::npos ? 0 : comma);
    const auto at = seg.rfind(" at ");
    const auto mb = seg.rfind(" m bearing ");
    if (sp == std::string::npos || open == std::string::npos || comma == std::string::npos ||
        close == std::string::npos || at == std::string::npos || mb == std::string::npos || sp >= open ||
        at < close || mb < at) {
      continue;
    }
    VisibleObject obj;
    obj.color = seg.substr(0, sp);
    obj.tag = seg.substr(sp + 1, open - sp - 1);
    obj.state = seg.substr(open + 2, comma - open - 2);
    obj.region = seg.substr(close + 5, at - close - 5);
    try {
      obj.count = std::stoi(seg.substr(comma + 3, close - comma - 3));
      obj.distance = std::stod(seg.substr(at + 4, mb - at - 4));
      obj.bearing = std::stod(seg.substr(mb + 11));
    } catch (const std::exception&) {
      continue;
    }
    if (obj.color == "none") {
      obj.color.clear();
    }
    if (obj.state == "none") {
      obj.state.clear();
    }
    out.push_back(std::move(obj));
  }
  return out;
}

std::optional<std::string> answer_from_captions(const std::vector<std::string>& captions, std::string_view tag,
                                                QuestionType qtype) {
  for (const auto& caption : captions) {
    const auto objs = parse_caption(caption);
    const auto it = std::find_if(objs.begin(), objs.end(), [&](const VisibleObject& o) { return o.tag == tag; });
    if (it == objs.end()) {
      continue;
    }
    switch (qtype) {
      case QuestionType::Attribute:
        return it->color;
      case QuestionType::State:
        return it->state;
      case QuestionType::Counting:
        return std::to_string(it->count);
      case QuestionType::Location:
        return it->region;
      case QuestionType::Relationship: {
        auto to_xy = [](const VisibleObject& o, double& x, double& y) {
          const double rad = o.bearing * kPi / 180.0;
          x = o.distance * std::cos(rad);
          y = o.distance * std::sin(rad);
        };
        double gx = 0.0;
        double gy = 0.0;
        to_xy(*it, gx, gy);
        const VisibleObject* nearest = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& o : objs) {
          if (o.tag == it->tag) {
            continue;
          }
          double x = 0.0;
          double y = 0.0;
          to_xy(o, x, y);
          const double d = euclidean(x, y, gx, gy);
          if (d < best) {
            best = d;
            nearest = &o;
          }
        }
        if (nearest != nullptr) {
          return nearest->tag;
        }
        break;
      }
    }
  }
  return std::nullopt;
}

std::unique_ptr<Policy> make_policy(const std::string& spec, const EngineConfig& cfg) {
  if (spec == "random") {
    return std::make_unique<RandomPolicy>();
  }
  if (spec == "greedy" || spec == "greedy_frontier") {
    return std::make_unique<GreedyFrontierPolicy>();
  }
  if (spec == "oracle") {
    return std::make_unique<OraclePolicy>(true);
  }
  if (spec == "oracle-noretrieval") {
    return std::make_unique<OraclePolicy>(false);
  }
  if (spec.rfind("external:", 0) == 0) {
    return std::make_unique<ExternalPolicy>(spec.substr(9), cfg.response_timeout_s);
  }
  throw ContractViolation("unknown policy '" + spec +
                          "' (expected random, greedy, oracle, oracle-noretrieval or external:<endpoint>)");
}

}  // namespace memexplore
