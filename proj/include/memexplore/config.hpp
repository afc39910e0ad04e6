#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "memexplore/frontier.hpp"
#include "memexplore/memory_bank.hpp"
#include "memexplore/occupancy.hpp"
#include "memexplore/retrieval.hpp"
#include "memexplore/reward.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

std::string version_string();

struct PipelineConfig {
  int action_interval = 20;  // S: minimum steps between samples
  int window = 6;            // W: continuous-action window
  std::uint64_t qa_seed = 0;
};

struct JudgeConfig {
  // Open-ended score on a 0-100 scale is mean(judge) * scale.
  double scale = 20.0;
};

/// Every tunable constant of the engine. Defaults are the reference values.
struct EngineConfig {
  int budget_per_subtask = 50;
  int embedding_dim = kDefaultEmbeddingDim;
  ViewConfig views;
  SensorConfig sensor;
  FrontierConfig frontier;
  NoveltyConfig novelty;
  RetrievalConfig retrieval;
  RewardConstants reward;
  PipelineConfig pipeline;
  JudgeConfig judge;
  double response_timeout_s = 30.0;
};

nlohmann::json config_to_json(const EngineConfig& cfg);
/// Starts from `base` and overrides only the keys present; unknown keys are
/// rejected with ParseError so typos do not pass silently.
EngineConfig config_from_json(const nlohmann::json& j, EngineConfig base = {});
EngineConfig load_config(const std::filesystem::path& path, EngineConfig base = {});

}  // namespace memexplore
