#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memexplore/config.hpp"
#include "memexplore/embedding.hpp"
#include "memexplore/episode.hpp"
#include "memexplore/memory_bank.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

struct SampleLabel {
  MoveAction next_action = MoveAction::Stop;
  int gt_frontier_id = -1;  // frontier whose nav point is nearest the current goal
  std::string answer;

  friend bool operator==(const SampleLabel&, const SampleLabel&) = default;
};

struct TrainingSample {
  std::string task_id;
  int step = 0;
  Difficulty difficulty = Difficulty::Easy;
  std::string instruction;
  int subtask_index = 0;
  std::string subtask;
  Pose pose;
  ViewTriplet views;
  std::vector<FrontierRef> frontiers;
  std::optional<QuestionInfo> question;
  std::vector<int> memory_hint;  // retrieved for the question from the bank snapshot
  std::size_t bank_size = 0;     // snapshot = first bank_size entries of the final bank
  int trajectory_steps = 0;
  SampleLabel label;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

struct PipelineResult {
  std::vector<TrainingSample> samples;
  MemoryBank bank;  // bank after replaying the whole trajectory
};

/// True when actions[i .. i+window) exist and are all identical.
bool uniform_window(const std::vector<MoveAction>& actions, std::size_t i, int window);

/// Replays a logged trajectory: every step goes through the novelty filter
/// (which enforces the memory interval), goal memories are added where
/// subtasks ended, and a sample is taken at step i when the window starting
/// at i is action-uniform and at least `action_interval` steps passed since
/// the previous sample. Each sample may carry one question about a subtask
/// that already ended, drawn with a per-task seeded generator.
PipelineResult build_samples(const EpisodeLog& log, const Task& task, const EngineConfig& cfg,
                             const EmbeddingProvider& provider);

struct DatasetStats {
  std::size_t samples = 0;
  std::size_t tasks = 0;
  double avg_steps_per_task = 0.0;
  std::map<std::string, std::size_t> per_difficulty;
  std::map<std::string, std::size_t> per_qtype;
  std::map<std::string, std::size_t> per_action;
  std::size_t with_question = 0;
};

DatasetStats dataset_stats(const std::vector<TrainingSample>& samples);

nlohmann::json sample_to_json(const TrainingSample& s);
TrainingSample sample_from_json(const nlohmann::json& j);
nlohmann::json stats_to_json(const DatasetStats& s);

}  // namespace memexplore
