#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memexplore/config.hpp"
#include "memexplore/embedding.hpp"
#include "memexplore/episode.hpp"
#include "memexplore/generator.hpp"
#include "memexplore/judge.hpp"

namespace memexplore {

struct TaskFailure {
  std::string task_id;
  std::string message;
};

struct SuiteRun {
  std::vector<EpisodeLog> logs;  // suite order, failed tasks omitted
  std::vector<TaskFailure> failures;
};

/// Runs every suite entry with a fresh policy instance. Episode seeds come
/// from episode_seed(run_seed, task_id), so results do not depend on `jobs`.
SuiteRun run_suite(const std::vector<SuiteEntry>& entries, const std::string& policy_spec, const EngineConfig& cfg,
                   std::uint64_t run_seed, int jobs, const EmbeddingProvider& provider, const Judge& judge);

}  // namespace memexplore
