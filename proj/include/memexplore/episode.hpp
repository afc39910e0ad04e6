#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memexplore/config.hpp"
#include "memexplore/embedding.hpp"
#include "memexplore/judge.hpp"
#include "memexplore/memory_bank.hpp"
#include "memexplore/policy.hpp"
#include "memexplore/reward.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

inline constexpr int kLogVersion = 1;

struct MemoryEvent {
  InsertOutcome outcome = InsertOutcome::SkippedInterval;
  int index = -1;  // set when inserted

  friend bool operator==(const MemoryEvent&, const MemoryEvent&) = default;
};

struct ToolRecord {
  std::string query;
  std::optional<std::string> failure;
  std::vector<int> retrieved_ids;

  friend bool operator==(const ToolRecord&, const ToolRecord&) = default;
};

struct StepRecord {
  int step = 0;  // global step index within the episode
  int subtask = 0;
  Pose pose;     // before the action
  MoveAction action = MoveAction::Stop;
  bool blocked = false;
  ViewTriplet views;
  std::vector<FrontierRef> frontiers;
  std::optional<int> frontier_choice;
  std::optional<MemoryEvent> memory_event;
  std::optional<ToolRecord> tool;
  std::string response;  // raw text of the final response

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class EndReason { Success, Stop, Budget, Abort };
std::string_view to_string(EndReason r);
std::optional<EndReason> parse_end_reason(std::string_view s);

struct SubtaskRecord {
  int index = 0;
  std::string goal_tag;
  bool success = false;
  double path_length = 0.0;  // meters actually moved
  double shortest = -1.0;    // geodesic from the subtask start, -1 if unreachable
  int steps = 0;
  EndReason end_reason = EndReason::Budget;
  int end_step = 0;  // global step count when the subtask ended
  Pose start_pose;
  Pose end_pose;
  ViewTriplet end_views;
  int goal_memory_index = -1;

  friend bool operator==(const SubtaskRecord&, const SubtaskRecord&) = default;
};

struct QARecord {
  int question_index = 0;
  std::string question;
  QuestionType qtype = QuestionType::Attribute;
  AnswerFormat format = AnswerFormat::Choice;
  std::string answer;
  std::string reference;
  bool correct = false;
  int judge_score = 1;
  std::optional<ToolRecord> tool;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

struct EpisodeLog {
  std::string version;
  nlohmann::json config;
  std::string task_id;
  std::string policy;
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::Easy;
  int subtask_count = 0;
  std::vector<StepRecord> steps;
  std::vector<SubtaskRecord> subtasks;
  std::vector<QARecord> qa;
  std::optional<std::string> abort_reason;

  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// Runs navigation subtasks in order, then the QA phase. A subtask ends on
/// success (within 1 m after an action), Stop, or when its step budget runs
/// out; a goal memory is stored at every subtask end. Each decision step
/// inserts the current observation through the novelty filter. A protocol
/// violation aborts the episode: the current and remaining subtasks fail and
/// unasked questions are recorded as unanswered.
EpisodeLog run_episode(const Scene& scene, const Task& task, Policy& policy, const EngineConfig& cfg,
                       std::uint64_t seed, const EmbeddingProvider& provider, const Judge& judge,
                       MemoryBank* bank_out = nullptr);

/// Header, then step / subtask records in execution order, then qa records,
/// then an optional abort record. One JSON object per line.
std::string log_to_jsonl(const EpisodeLog& log);
EpisodeLog log_from_jsonl(std::string_view text);
void save_log(const EpisodeLog& log, const std::filesystem::path& path);
EpisodeLog load_log(const std::filesystem::path& path);

nlohmann::json step_to_json(const StepRecord& r);
StepRecord step_from_json(const nlohmann::json& j, std::string_view where);

}  // namespace memexplore
