#include "memexplore/runner.hpp"

#include <atomic>
#include <optional>
#include <thread>

#include "memexplore/error.hpp"
#include "memexplore/policy.hpp"

namespace memexplore {

SuiteRun run_suite(const std::vector<SuiteEntry>& entries, const std::string& policy_spec, const EngineConfig& cfg,
                   std::uint64_t run_seed, int jobs, const EmbeddingProvider& provider, const Judge& judge) {
  if (jobs < 1) {
    throw ContractViolation("run_suite: jobs must be >= 1");
  }
  make_policy(policy_spec, cfg);  // reject unknown policies before starting any work
  std::vector<std::optional<EpisodeLog>> logs(entries.size());
  std::vector<std::optional<std::string>> errors(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        const Scene scene = load_scene(entries[i].scene_path);
        const Task task = load_task(entries[i].task_path);
        auto policy = make_policy(policy_spec, cfg);
        logs[i] = run_episode(scene, task, *policy, cfg, episode_seed(run_seed, task.id), provider, judge);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto n = static_cast<std::size_t>(jobs) < entries.size() ? static_cast<std::size_t>(jobs) : entries.size();
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) {
    threads.emplace_back(worker);
  }
  worker();
  for (auto& t : threads) {
    t.join();
  }
  SuiteRun out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (logs[i]) {
      out.logs.push_back(std::move(*logs[i]));
    } else {
      out.failures.push_back(TaskFailure{entries[i].id, errors[i].value_or("unknown error")});
    }
  }
  return out;
}

}  // namespace memexplore
