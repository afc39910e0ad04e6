#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "memexplore/config.hpp"
#include "memexplore/data_pipeline.hpp"
#include "memexplore/error.hpp"
#include "memexplore/evaluation.hpp"
#include "memexplore/generator.hpp"
#include "memexplore/json_io.hpp"
#include "memexplore/reward.hpp"
#include "memexplore/runner.hpp"
#include "memexplore/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace memexplore;

namespace {

struct Common {
  std::string config_path;
  std::string features_path;
  int budget = 0;
};

EngineConfig resolve_config(const Common& c) {
  EngineConfig cfg;
  std::string path = c.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MEMEXPLORE_CONFIG"); env != nullptr && *env != '\0') {
      path = env;
    }
  }
  if (!path.empty()) {
    cfg = load_config(path, cfg);
  }
  if (c.budget > 0) {
    cfg.budget_per_subtask = c.budget;
  }
  return cfg;
}

std::unique_ptr<EmbeddingProvider> make_provider(const Common& c, const EngineConfig& cfg) {
  if (!c.features_path.empty()) {
    return std::make_unique<FeatureFileProvider>(c.features_path);
  }
  return std::make_unique<HashingProvider>(cfg.embedding_dim);
}

std::vector<EpisodeLog> load_logs(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ParseError("log directory '" + dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ParseError("log directory '" + dir.string() + "' contains no .jsonl logs");
  }
  std::vector<EpisodeLog> logs;
  for (const auto& f : files) {
    logs.push_back(load_log(f));
  }
  return logs;
}

void print_rows(const BenchReport& r) {
  std::printf("%-7s %9s %9s %9s %9s\n", "row", "SR", "SPL", "Score", "Acc");
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (v) {
      std::snprintf(buf, sizeof(buf), "%9.2f", *v);
    } else {
      std::snprintf(buf, sizeof(buf), "%9s", "-");
    }
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    std::printf("%-7s %s %s %s %s\n", row.name.c_str(), cell(row.sr()).c_str(), cell(row.spl()).c_str(),
                cell(row.score(r.judge_scale)).c_str(), cell(row.acc()).c_str());
  }
}

void write_report(const BenchReport& report, const fs::path& out_dir, const std::string& csv) {
  json_io::write_atomically(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  if (!csv.empty()) {
    json_io::write_atomically(csv, report_to_csv(report));
  }
}

int cmd_gen(std::uint64_t seed, int count, double size, const std::string& out) {
  GeneratorConfig g;
  g.size_m = size;
  const auto ids = generate_suite(seed, count, g, out);
  for (const auto& e : list_suite(out)) {
    if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) {
      continue;
    }
    const Task t = load_task(e.task_path);
    std::printf("%s %s goals=%zu questions=%zu\n", t.id.c_str(), std::string(to_string(t.difficulty)).c_str(),
                t.subtasks.size(), t.questions.size());
  }
  return 0;
}

int cmd_run(const Common& common, const std::string& tasks, const std::string& policy, std::uint64_t seed, int jobs,
            const std::string& out, const std::string& csv) {
  const EngineConfig cfg = resolve_config(common);
  const auto provider = make_provider(common, cfg);
  const RuleJudge judge;
  const auto entries = list_suite(tasks);
  if (entries.empty()) {
    throw ParseError("no tasks found in '" + tasks + "'");
  }
  const SuiteRun run = run_suite(entries, policy, cfg, seed, jobs, *provider, judge);
  const fs::path out_dir(out);
  for (const auto& log : run.logs) {
    json_io::write_atomically(out_dir / "logs" / (log.task_id + ".jsonl"), log_to_jsonl(log));
  }
  json failures = json::array();
  for (const auto& f : run.failures) {
    std::fprintf(stderr, "task %s failed: %s\n", f.task_id.c_str(), f.message.c_str());
    failures.push_back(json{{"task_id", f.task_id}, {"error", f.message}});
  }
  if (!run.failures.empty()) {
    json_io::write_atomically(out_dir / "failures.json", failures.dump(2) + "\n");
  }
  const std::string policy_name = run.logs.empty() ? policy : run.logs.front().policy;
  const BenchReport report = build_report(run.logs, policy_name, config_to_json(cfg), cfg.judge.scale);
  write_report(report, out_dir, csv);
  std::printf("policy %s: %zu episodes, %d aborted, %zu failed\n", policy_name.c_str(), run.logs.size(),
              report.aborted, run.failures.size());
  print_rows(report);
  return 0;
}

int cmd_build_dataset(const Common& common, const std::string& logs_dir, const std::string& tasks,
                      const std::string& out, const std::string& stats_out) {
  const EngineConfig cfg = resolve_config(common);
  const auto provider = make_provider(common, cfg);
  const auto logs = load_logs(logs_dir);
  std::map<std::string, fs::path> task_paths;
  for (const auto& e : list_suite(tasks)) {
    task_paths[e.id] = e.task_path;
  }
  std::vector<TrainingSample> samples;
  for (const auto& log : logs) {
    const auto it = task_paths.find(log.task_id);
    if (it == task_paths.end()) {
      throw ParseError("no task file for log '" + log.task_id + "'");
    }
    auto result = build_samples(log, load_task(it->second), cfg, *provider);
    for (auto& s : result.samples) {
      samples.push_back(std::move(s));
    }
  }
  std::string body;
  for (const auto& s : samples) {
    body += sample_to_json(s).dump() + "\n";
  }
  json_io::write_atomically(out, body);
  json stats = stats_to_json(dataset_stats(samples));
  stats["version"] = version_string();
  stats["config"] = config_to_json(cfg);
  const std::string stats_path = stats_out.empty() ? out + ".stats.json" : stats_out;
  json_io::write_atomically(stats_path, stats.dump(2) + "\n");
  std::printf("%zu samples from %zu logs -> %s\n", samples.size(), logs.size(), out.c_str());
  return 0;
}

int cmd_eval(const std::string& logs_dir, const std::string& out, const std::string& csv) {
  const auto logs = load_logs(logs_dir);
  const auto& first = logs.front();
  const EngineConfig cfg = config_from_json(first.config);
  const BenchReport report = build_report(logs, first.policy, first.config, cfg.judge.scale);
  write_report(report, out, csv);
  print_rows(report);
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& scene_path) {
  const EpisodeLog log = load_log(log_path);
  int mismatches = 0;
  std::optional<Scene> scene;
  if (!scene_path.empty()) {
    scene = load_scene(scene_path);
  }
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto& s = log.steps[i];
    std::printf("%4d sub=%d pose=(%.2f, %.2f, %3.0f) %-10s%s frontier=%s\n", s.step, s.subtask, s.pose.x, s.pose.y,
                s.pose.heading, std::string(to_string(s.action)).c_str(), s.blocked ? " blocked" : "",
                s.frontier_choice ? std::to_string(*s.frontier_choice).c_str() : "-");
    if (!scene || s.action == MoveAction::Stop) {
      continue;
    }
    const bool blocked = s.action == MoveAction::Forward && forward_blocked(*scene, s.pose);
    if (blocked != s.blocked) {
      std::printf("     mismatch: blocked flag\n");
      ++mismatches;
    }
    if (i + 1 < log.steps.size()) {
      EpisodeState st;
      st.pose = s.pose;
      apply_step(*scene, st, s.action);
      if (!(st.pose == log.steps[i + 1].pose)) {
        std::printf("     mismatch: next pose\n");
        ++mismatches;
      }
    }
  }
  for (const auto& sub : log.subtasks) {
    std::printf("subtask %d %s: %s steps=%d path=%.2f shortest=%.2f\n", sub.index, sub.goal_tag.c_str(),
                std::string(to_string(sub.end_reason)).c_str(), sub.steps, sub.path_length, sub.shortest);
  }
  for (const auto& q : log.qa) {
    std::printf("qa %d [%s] %s -> '%s' (ref '%s') %s\n", q.question_index, std::string(to_string(q.qtype)).c_str(),
                q.question.c_str(), q.answer.c_str(), q.reference.c_str(), q.correct ? "correct" : "wrong");
  }
  if (log.abort_reason) {
    std::printf("aborted: %s\n", log.abort_reason->c_str());
  }
  if (scene) {
    std::printf("replay %s: %d mismatches\n", mismatches == 0 ? "ok" : "FAILED", mismatches);
  }
  return mismatches == 0 ? 0 : 1;
}

int cmd_score_rollouts(const Common& common, const std::string& in, const std::string& out,
                       const std::string& constants_out) {
  const EngineConfig cfg = resolve_config(common);
  const std::string scored = score_rollouts(json_io::read_text(in), cfg.reward);
  if (out.empty() || out == "-") {
    std::fwrite(scored.data(), 1, scored.size(), stdout);
  } else {
    json_io::write_atomically(out, scored);
  }
  if (!constants_out.empty()) {
    json k = constants_to_json(cfg.reward);
    k["version"] = version_string();
    json_io::write_atomically(constants_out, k.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memexplore: memory-augmented embodied exploration benchmark"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "engine config JSON (default: $MEMEXPLORE_CONFIG)");
    sub->add_option("--features", common.features_path, "feature file replacing the hashing embeddings");
  };

  std::uint64_t seed = 0;
  int count = 20;
  double size = 24.0;
  std::string out;
  auto* gen = app.add_subcommand("gen", "generate scenes and tasks");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--count", count, "number of tasks");
  gen->add_option("--size", size, "longest scene side in meters (8..100)");
  gen->add_option("--out", out, "output directory")->required();

  std::string tasks;
  std::string policy = "random";
  int jobs = 1;
  std::string csv;
  auto* run = app.add_subcommand("run", "run a policy over a task suite");
  add_common(run);
  run->add_option("--tasks", tasks, "suite directory")->required();
  run->add_option("--policy", policy, "random | greedy | oracle | oracle-noretrieval | external:<endpoint>");
  run->add_option("--seed", seed, "run seed");
  run->add_option("--jobs", jobs, "parallel episodes")->check(CLI::PositiveNumber);
  run->add_option("--budget", common.budget, "step budget per subtask")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--csv", csv, "also write the report as CSV");

  std::string logs_dir;
  std::string stats_out;
  auto* ds = app.add_subcommand("build-dataset", "build training samples from episode logs");
  add_common(ds);
  ds->add_option("--logs", logs_dir, "directory of episode logs")->required();
  ds->add_option("--tasks", tasks, "suite directory")->required();
  ds->add_option("--out", out, "output JSONL")->required();
  ds->add_option("--stats", stats_out, "stats JSON (default: <out>.stats.json)");

  auto* ev = app.add_subcommand("eval", "rebuild a report from episode logs");
  ev->add_option("--logs", logs_dir, "directory of episode logs")->required();
  ev->add_option("--out", out, "output directory for report.json")->required();
  ev->add_option("--csv", csv, "also write the report as CSV");

  std::string log_path;
  std::string scene_path;
  auto* rp = app.add_subcommand("replay", "print an episode log and re-check it against its scene");
  rp->add_option("--log", log_path, "episode log")->required();
  rp->add_option("--scene", scene_path, "scene to re-simulate the actions on");

  std::string in;
  std::string constants_out;
  auto* sr = app.add_subcommand("score-rollouts", "score rollout responses with the reward function");
  add_common(sr);
  sr->add_option("--in", in, "rollout JSONL")->required();
  sr->add_option("--out", out, "scored JSONL (default: stdout)");
  sr->add_option("--constants-out", constants_out, "write the reward constants used");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) {
      return cmd_gen(seed, count, size, out);
    }
    if (run->parsed()) {
      return cmd_run(common, tasks, policy, seed, jobs, out, csv);
    }
    if (ds->parsed()) {
      return cmd_build_dataset(common, logs_dir, tasks, out, stats_out);
    }
    if (ev->parsed()) {
      return cmd_eval(logs_dir, out, csv);
    }
    if (rp->parsed()) {
      return cmd_replay(log_path, scene_path);
    }
    if (sr->parsed()) {
      return cmd_score_rollouts(common, in, out, constants_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
