#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memexplore/geometry.hpp"
#include "memexplore/response.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

inline constexpr double kKlCoefficient = 0.1;

enum class ToolStatus { Success, FailOrAbsent };
std::string_view to_string(ToolStatus s);
std::optional<ToolStatus> parse_tool_status(std::string_view s);

struct RewardWeights {
  double action = 0.2;
  double frontier = 0.2;
  double answer = 0.4;
  double format = 0.2;
};

struct RewardConstants {
  RewardWeights weights;
  double c_inconsistent = 0.5;
  double alpha_success = 1.2;           // all four sub-rewards
  double alpha_fail_navigation = 0.6;   // action and frontier sub-rewards
  double alpha_fail_other = 0.5;        // answer and format sub-rewards
  double forward_max_deg = 45.0;        // Forward is consistent for |beta| <= this
  double turn_min_deg = 30.0;           // turns are consistent beyond this, on their side
  bool binary_format = false;           // r_format 1 only when all three segments exist
  double kl_beta = kKlCoefficient;
  int topk = 3;
};

/// Frontier identity and navigation point, enough to judge consistency.
struct FrontierRef {
  int id = -1;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const FrontierRef&, const FrontierRef&) = default;
};

/// 1.0 when the pair is consistent or incomplete, c_inconsistent otherwise.
/// beta = steering_bearing(pose, nav point): positive on the TurnLeft side.
double consistency(std::optional<MoveAction> action, const std::optional<FrontierRef>& frontier,
                   const Pose& pose, const RewardConstants& k = {});
/// The bare predicate on a bearing in degrees (normalized internally).
bool consistent_pair(MoveAction action, double beta_deg, const RewardConstants& k = {});

struct RewardBreakdown {
  double r_action = 0.0;
  double r_frontier = 0.0;
  double r_answer = 0.0;
  double r_format = 0.0;
  double c = 1.0;
  ToolStatus tool = ToolStatus::FailOrAbsent;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// clip(w_a r_a c alpha_a + w_f r_f c alpha_f + w_n r_n alpha_n + w_m r_m alpha_m, 0, 1)
double evaluate_total(const RewardBreakdown& b, const RewardConstants& k = {});

struct GroundTruth {
  MoveAction action = MoveAction::Stop;
  int frontier_id = -1;
  std::string answer;
  AnswerFormat format = AnswerFormat::Choice;
};

/// Token-overlap F1 on lowercase alphanumeric tokens.
double token_f1(std::string_view predicted, std::string_view reference);
/// Exact match after trimming surrounding whitespace.
bool choice_match(std::string_view predicted, std::string_view reference);

RewardBreakdown total_reward(const AgentResponse& response, const GroundTruth& gt, const Pose& pose,
                             const std::vector<FrontierRef>& frontiers, ToolStatus tool,
                             const RewardConstants& k = {});

/// (r_i - mean) / (population std + eps). Throws ContractViolation for fewer
/// than two rewards.
std::vector<double> group_relative_advantages(const std::vector<double>& rewards, double eps = 1e-8);

nlohmann::json constants_to_json(const RewardConstants& k);
nlohmann::json breakdown_to_json(const RewardBreakdown& b);

/// Batch scorer: each input line {raw_response, gt:{action, frontier_id,
/// answer, format?}, pose, tool_status, frontiers?:[{id,x,y}]}; each output
/// line is the breakdown with its total. Throws ParseError naming the line.
std::string score_rollouts(std::string_view jsonl, const RewardConstants& k = {});

}  // namespace memexplore
