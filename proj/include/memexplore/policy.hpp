#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "memexplore/config.hpp"
#include "memexplore/planner.hpp"
#include "memexplore/response.hpp"
#include "memexplore/retrieval.hpp"
#include "memexplore/scene.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

struct FrontierInfo {
  int id = -1;
  Pose nav_point;
  double steering_bearing = 0.0;  // degrees, positive on the TurnLeft side
  double distance = 0.0;          // straight-line meters
  double geodesic = -1.0;         // meters through known free space, -1 if none
  View snapshot;

  friend bool operator==(const FrontierInfo&, const FrontierInfo&) = default;
};

struct MemoryRecord {
  int index = -1;
  std::string caption;
  Pose pose;
  double score = 0.0;
  Channel channel = Channel::Text;

  friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct QuestionInfo {
  int index = 0;
  std::string question;
  QuestionType qtype = QuestionType::Attribute;
  AnswerFormat format = AnswerFormat::Choice;
  std::vector<std::string> choices;

  friend bool operator==(const QuestionInfo&, const QuestionInfo&) = default;
};

enum class RequestType { Step, QA };

/// Everything a policy sees for one decision. `memories` (and `tool_error`
/// when the call failed) are present only in the second round, after a tool
/// call.
struct StepRequest {
  RequestType type = RequestType::Step;
  int round = 1;
  int step = 0;
  int subtask_index = 0;
  std::string instruction;
  std::string subtask;  // descriptor of the current subtask
  std::string target;   // goal tag of the current subtask
  Pose pose;
  ViewTriplet views;
  std::vector<FrontierInfo> frontiers;
  std::optional<QuestionInfo> question;
  std::optional<std::vector<MemoryRecord>> memories;
  std::optional<std::string> tool_error;
  int budget = 0;  // steps remaining for the current subtask

  friend bool operator==(const StepRequest&, const StepRequest&) = default;
};

struct EpisodeContext {
  const Scene* scene = nullptr;
  const Task* task = nullptr;
  std::uint64_t seed = 0;
  EngineConfig config;
};

/// Contract: decide() answers every request; at most one tool call per
/// decision step (a tool call in the second round is a protocol violation).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const EpisodeContext& /*ctx*/) {}
  virtual AgentResponse decide(const StepRequest& request) = 0;
  virtual void end_episode() {}
};

/// Builds a response whose raw text is the canonical form of the fields.
AgentResponse act_response(std::optional<MoveAction> action, std::optional<int> frontier,
                           std::optional<std::string> answer = std::nullopt);
AgentResponse tool_response(std::string_view query);

/// Seed for one episode: the run seed mixed with the task id.
std::uint64_t episode_seed(std::uint64_t run_seed, std::string_view task_id);

/// Answers a question without memory: first choice, or "unknown".
std::string default_answer(const QuestionInfo& q);

/// Uniform over Forward / TurnLeft / TurnRight and over visible frontiers;
/// never calls the tool.
class RandomPolicy : public Policy {
 public:
  std::string name() const override { return "random"; }
  void begin_episode(const EpisodeContext& ctx) override { rng_.seed(ctx.seed); }
  AgentResponse decide(const StepRequest& request) override;

 private:
  std::mt19937_64 rng_{0};
};

/// Steers toward the goal when it is in view, otherwise toward the frontier
/// nearest by geodesic distance. Turns when the last Forward was blocked.
class GreedyFrontierPolicy : public Policy {
 public:
  std::string name() const override { return "greedy"; }
  void begin_episode(const EpisodeContext& ctx) override;
  AgentResponse decide(const StepRequest& request) override;

  /// |beta| <= 15 deg -> Forward, beta > 0 -> TurnLeft, else TurnRight.
  static MoveAction steer(double steering_bearing_deg);

 private:
  std::mt19937_64 rng_{0};
  std::optional<Pose> last_pose_;
  std::optional<MoveAction> last_action_;
};

/// Privileged upper bound: follows plan_to_goal over the true scene and, in
/// the QA phase, queries memory for the question's goal and reads the answer
/// from the retrieved captions. With use_memory = false it answers without
/// the tool.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(bool use_memory = true) : use_memory_(use_memory) {}
  std::string name() const override { return use_memory_ ? "oracle" : "oracle-noretrieval"; }
  void begin_episode(const EpisodeContext& ctx) override;
  AgentResponse decide(const StepRequest& request) override;

 private:
  AgentResponse navigate(const StepRequest& request);
  AgentResponse answer(const StepRequest& request);

  bool use_memory_;
  const Scene* scene_ = nullptr;
  const Task* task_ = nullptr;
  ViewConfig view_cfg_;
  std::optional<Plan> plan_;
  int plan_subtask_ = -1;
  std::size_t cursor_ = 0;
};

/// Parses a caption segment list back into objects (inverse of caption_for).
std::vector<VisibleObject> parse_caption(std::string_view caption);

/// Extracts the answer to a question about `tag` from memory captions, or
/// nullopt when no caption mentions the tag.
std::optional<std::string> answer_from_captions(const std::vector<std::string>& captions, std::string_view tag,
                                                QuestionType qtype);

/// "random", "greedy", "oracle", "oracle-noretrieval", or
/// "external:spawn:<command>" / "external:tcp:<host>:<port>".
std::unique_ptr<Policy> make_policy(const std::string& spec, const EngineConfig& cfg);

}  // namespace memexplore
