#include "memexplore/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "memexplore/embedding.hpp"
#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

std::string_view to_string(ToolStatus s) { return s == ToolStatus::Success ? "success" : "fail_or_absent"; }

std::optional<ToolStatus> parse_tool_status(std::string_view s) {
  if (s == "success") {
    return ToolStatus::Success;
  }
  if (s == "fail_or_absent" || s == "fail" || s == "failed" || s == "absent" || s == "none") {
    return ToolStatus::FailOrAbsent;
  }
  return std::nullopt;
}

bool consistent_pair(MoveAction action, double beta_deg, const RewardConstants& k) {
  const double beta = normalize_signed(beta_deg);
  switch (action) {
    case MoveAction::Forward:
      return std::abs(beta) <= k.forward_max_deg;
    case MoveAction::TurnLeft:
      return beta > k.turn_min_deg && beta <= 180.0;
    case MoveAction::TurnRight:
      return beta <= -k.turn_min_deg || beta == 180.0;
    case MoveAction::Stop:
      return false;
  }
  return false;
}

double consistency(std::optional<MoveAction> action, const std::optional<FrontierRef>& frontier,
                   const Pose& pose, const RewardConstants& k) {
  if (!action || !frontier) {
    return 1.0;
  }
  const double beta = steering_bearing(pose, frontier->x, frontier->y);
  return consistent_pair(*action, beta, k) ? 1.0 : k.c_inconsistent;
}

double evaluate_total(const RewardBreakdown& b, const RewardConstants& k) {
  const bool ok = b.tool == ToolStatus::Success;
  const double a_nav = ok ? k.alpha_success : k.alpha_fail_navigation;
  const double a_other = ok ? k.alpha_success : k.alpha_fail_other;
  const double raw = k.weights.action * b.r_action * b.c * a_nav + k.weights.frontier * b.r_frontier * b.c * a_nav +
                     k.weights.answer * b.r_answer * a_other + k.weights.format * b.r_format * a_other;
  return std::clamp(raw, 0.0, 1.0);
}

double token_f1(std::string_view predicted, std::string_view reference) {
  const auto p = tokenize(predicted);
  const auto r = tokenize(reference);
  if (p.empty() && r.empty()) {
    return 1.0;
  }
  if (p.empty() || r.empty()) {
    return 0.0;
  }
  std::map<std::string, int> counts;
  for (const auto& t : r) {
    ++counts[t];
  }
  int common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) {
    return 0.0;
  }
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(r.size());
  return 2.0 * precision * recall / (precision + recall);
}

bool choice_match(std::string_view predicted, std::string_view reference) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
      s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
      s.remove_suffix(1);
    }
    return s;
  };
  return trim(predicted) == trim(reference);
}

RewardBreakdown total_reward(const AgentResponse& response, const GroundTruth& gt, const Pose& pose,
                             const std::vector<FrontierRef>& frontiers, ToolStatus tool,
                             const RewardConstants& k) {
  RewardBreakdown b;
  b.tool = tool;
  b.r_action = response.action && *response.action == gt.action ? 1.0 : 0.0;
  b.r_frontier = response.frontier_id && *response.frontier_id == gt.frontier_id ? 1.0 : 0.0;
  if (response.answer) {
    b.r_answer = gt.format == AnswerFormat::Choice ? (choice_match(*response.answer, gt.answer) ? 1.0 : 0.0)
                                                   : token_f1(*response.answer, gt.answer);
  }
  const int segs = response.segments_present();
  b.r_format = k.binary_format ? (segs == 3 ? 1.0 : 0.0) : static_cast<double>(segs) / 3.0;

  std::optional<FrontierRef> chosen;
  if (response.frontier_id) {
    for (const auto& f : frontiers) {
      if (f.id == *response.frontier_id) {
        chosen = f;
        break;
      }
    }
  }
  b.c = consistency(response.action, chosen, pose, k);
  b.total = evaluate_total(b, k);
  return b;
}

std::vector<double> group_relative_advantages(const std::vector<double>& rewards, double eps) {
  if (rewards.size() < 2) {
    throw ContractViolation("group_relative_advantages: group size must be >= 2");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) {
    mean += r;
  }
  mean /= n;
  double var = 0.0;
  for (double r : rewards) {
    var += (r - mean) * (r - mean);
  }
  const double sd = std::sqrt(var / n);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) {
    out.push_back((r - mean) / (sd + eps));
  }
  return out;
}

nlohmann::json constants_to_json(const RewardConstants& k) {
  return nlohmann::json{
      {"weights",
       {{"action", k.weights.action},
        {"frontier", k.weights.frontier},
        {"answer", k.weights.answer},
        {"format", k.weights.format}}},
      {"c", k.c_inconsistent},
      {"alpha",
       {{"success", k.alpha_success},
        {"fail_navigation", k.alpha_fail_navigation},
        {"fail_other", k.alpha_fail_other}}},
      {"consistency", {{"forward_max_deg", k.forward_max_deg}, {"turn_min_deg", k.turn_min_deg}}},
      {"binary_format", k.binary_format},
      {"kl_beta", k.kl_beta},
      {"topk", k.topk},
  };
}

nlohmann::json breakdown_to_json(const RewardBreakdown& b) {
  return nlohmann::json{{"r_action", b.r_action}, {"r_frontier", b.r_frontier}, {"r_answer", b.r_answer},
                        {"r_format", b.r_format}, {"c", b.c},
                        {"tool_status", std::string(to_string(b.tool))}, {"total", b.total}};
}

std::string score_rollouts(std::string_view jsonl, const RewardConstants& k) {
  std::string out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) {
      end = jsonl.size();
    }
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    const std::string where = "rollout line " + std::to_string(line_no);
    const auto j = json_io::parse(line, where);
    const auto raw = json_io::string(j, "raw_response", where);
    if (!j.contains("gt") || !j["gt"].is_object()) {
      throw ParseError(where + ": missing object 'gt'");
    }
    const auto& g = j["gt"];
    GroundTruth gt;
    const auto act = json_io::string(g, "action", where + ".gt");
    const auto parsed = parse_action(act);
    if (!parsed) {
      throw ParseError(where + ".gt.action: unknown action '" + act + "'");
    }
    gt.action = *parsed;
    gt.frontier_id = json_io::integer(g, "frontier_id", where + ".gt", -1);
    gt.answer = json_io::string(g, "answer", where + ".gt", "");
    const auto fmt = parse_answer_format(json_io::string(g, "format", where + ".gt", "choice"));
    if (!fmt) {
      throw ParseError(where + ".gt.format: expected choice or open");
    }
    gt.format = *fmt;
    const Pose pose = j.contains("pose") ? json_io::pose(j["pose"], where + ".pose") : Pose{};
    const auto status_text = json_io::string(j, "tool_status", where, "fail_or_absent");
    const auto status = parse_tool_status(status_text);
    if (!status) {
      throw ParseError(where + ".tool_status: unknown value '" + status_text + "'");
    }
    std::vector<FrontierRef> frontiers;
    if (j.contains("frontiers")) {
      for (const auto& f : j["frontiers"]) {
        frontiers.push_back({json_io::integer(f, "id", where + ".frontiers"),
                             json_io::number(f, "x", where + ".frontiers"),
                             json_io::number(f, "y", where + ".frontiers")});
      }
    }
    const auto b = total_reward(parse_response(raw), gt, pose, frontiers, *status, k);
    auto rec = breakdown_to_json(b);
    if (j.contains("id")) {
      rec["id"] = j["id"];
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace memexplore
