#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memexplore/scene.hpp"

namespace memexplore {

struct GeneratorConfig {
  double size_m = 24.0;     // longest scene side; valid range 8..100
  int budget_per_subtask = 50;
  int min_goals = 2;
  int max_goals = 9;
  int attempts = 60;        // task resampling attempts before changing band
};

struct GeneratedTask {
  Scene scene;
  Task task;
};

/// Multi-room scene: recursive binary splits separated by 0.2 m walls with
/// one 1 m door per split, a few pillars, and uniquely tagged objects with
/// color / state / count attributes.
Scene generate_scene(std::uint64_t seed, double size_m);

/// Task `index` of a suite targets difficulty band index % 3 (falling back
/// to other bands when the scene cannot host it). Goals are chained by
/// nearest neighbor; the chain is accepted only if the oracle planner reaches
/// every goal within the per-subtask budget. One question per goal, cycling
/// through the question types.
GeneratedTask generate_task(std::uint64_t seed, int index, const GeneratorConfig& cfg = {});

std::string suite_task_id(std::uint64_t seed, int index);

/// Writes <id>.scene.json and <id>.task.json for `count` tasks; returns ids.
std::vector<std::string> generate_suite(std::uint64_t seed, int count, const GeneratorConfig& cfg,
                                        const std::filesystem::path& out_dir);

struct SuiteEntry {
  std::string id;
  std::filesystem::path scene_path;
  std::filesystem::path task_path;
};
/// Pairs every *.task.json in `dir` with its *.scene.json, sorted by id.
std::vector<SuiteEntry> list_suite(const std::filesystem::path& dir);

}  // namespace memexplore
