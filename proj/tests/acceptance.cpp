// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memexplore/data_pipeline.hpp"
#include "memexplore/evaluation.hpp"
#include "memexplore/frontier.hpp"
#include "memexplore/judge.hpp"
#include "memexplore/retrieval.hpp"
#include "memexplore/reward.hpp"
#include "memexplore/runner.hpp"
#include "memexplore/simulator.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace memexplore;
using memexplore::testing::goal_task;
using memexplore::testing::SceneBuilder;

namespace {

struct TableRow {
  bool success;
  double c;
  int action;
  int frontier;
  int answer;
  int format;
  double total;
};

const TableRow kTable[] = {
#include "reward_table.inc"
};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) {
      detail << what;
    }
    pass = pass && ok;
  }
};

int g_failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0) {
    std::ostringstream t;
    t << "runtime " << secs << " s exceeds " << limit_s << " s";
    out.expect(secs < limit_s, t.str());
  }
  const std::string detail = out.detail.str();
  std::printf("%s %-28s %8.2f s%s%s\n", out.pass ? "PASS" : "FAIL", name.c_str(), secs,
              out.pass ? "" : "  ", out.pass ? "" : detail.c_str());
  std::fflush(stdout);
  g_failures += out.pass ? 0 : 1;
}

std::filesystem::path suite_dir() { return memexplore::testing::source_dir() / "data" / "suite_seed0"; }

std::vector<double> random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (double& x : v) {
    x = g(rng);
  }
  canonical_normalize(v);
  return v;
}

MemoryEntry random_entry(std::mt19937_64& rng, int step, int dim) {
  MemoryEntry e;
  e.step = step;
  e.caption = "m" + std::to_string(step);
  e.pose = Pose{static_cast<double>(rng() % 200) / 10.0, static_cast<double>(rng() % 200) / 10.0, 0.0};
  e.text_feature = random_unit(rng, dim);
  e.obs_feature = random_unit(rng, dim);
  return e;
}

void reward_table(Outcome& out) {
  out.expect(sizeof(kTable) / sizeof(kTable[0]) == 64, "table does not have 64 rows");
  int row_no = 0;
  for (const auto& r : kTable) {
    RewardBreakdown b;
    b.tool = r.success ? ToolStatus::Success : ToolStatus::FailOrAbsent;
    b.c = r.c;
    b.r_action = r.action;
    b.r_frontier = r.frontier;
    b.r_answer = r.answer;
    b.r_format = r.format;
    out.expect(std::abs(evaluate_total(b) - r.total) <= 1e-12, "table row " + std::to_string(row_no));
    ++row_no;
  }
  const Pose p{5.0, 5.0, 0.0};
  const std::vector<FrontierRef> fs{{1, 8.0, 5.0}, {2, 5.0, 4.0}};
  GroundTruth gt;
  gt.action = MoveAction::Forward;
  gt.frontier_id = 1;
  gt.answer = "B";
  const double perfect =
      total_reward(parse_response("ACTION: forward FRONTIER: 1 ANSWER: B"), gt, p, fs, ToolStatus::Success).total;
  const double nothing = total_reward(parse_response("hmm"), gt, p, fs, ToolStatus::FailOrAbsent).total;
  const double mixed =
      total_reward(parse_response("ACTION: forward FRONTIER: 2 ANSWER: B"), gt, p, fs, ToolStatus::FailOrAbsent).total;
  out.expect(std::abs(perfect - 1.0) <= 1e-12, "worked example 1.0");
  out.expect(std::abs(nothing - 0.0) <= 1e-12, "worked example 0.0");
  out.expect(std::abs(mixed - 0.36) <= 1e-12, "worked example 0.36");
}

void retrieval_equivalence(Outcome& out) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = trial == 0 ? 10000 : 1 + static_cast<int>(rng() % 10000);
    const int dim = 8 + static_cast<int>(rng() % 57);
    MemoryBank bank;
    for (int i = 0; i < n; ++i) {
      bank.force_goal_memory(random_entry(rng, i, dim));
    }
    const auto q = random_unit(rng, dim);
    RetrievalConfig cfg;
    cfg.topk = 1 + static_cast<int>(rng() % 10);
    const auto got = retrieve_vector(bank, q, cfg).ids();
    out.expect(got == oracle::brute_force_max_retrieval(bank.entries(), q, cfg.topk),
               "bank " + std::to_string(trial) + " of " + std::to_string(n) + " entries");
  }
}

void similarity_identities(Outcome& out) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const MemoryEntry a = random_entry(rng, 0, 2 + static_cast<int>(rng() % 100));
    SimilarityWeights w;
    if (trial > 0) {
      w.text = u(rng);
      w.obs = u(rng);
      w.pos = u(rng);
    }
    out.expect(similarity(a, a, w) == w.text + w.obs + w.pos, "self similarity trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 16;
    const MemoryEntry cur = random_entry(rng, 0, dim);
    std::vector<MemoryEntry> bank;
    const int n = 2 + static_cast<int>(rng() % 50);
    for (int i = 0; i < n; ++i) {
      bank.push_back(random_entry(rng, i, dim));
    }
    const SimilarityWeights w;
    SimilarityWeights scaled = w;
    const double t = u(rng);
    scaled.text *= t;
    scaled.obs *= t;
    scaled.pos *= t;
    auto argmax = [&](const SimilarityWeights& ww) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < bank.size(); ++i) {
        if (similarity(cur, bank[i], ww) > similarity(cur, bank[best], ww)) {
          best = i;
        }
      }
      return best;
    };
    out.expect(argmax(w) == argmax(scaled), "argmax changed under scaling, bank " + std::to_string(trial));
  }
}

OccupancyMap strip_map(int length) {
  OccupancyMap map(60, 60, 0.1);
  for (int c = 10; c < 10 + length; ++c) {
    map.set_state(Cell{30, c}, MapCell::Free);
    map.set_explored(Cell{30, c}, true);
  }
  return map;
}

void frontier_equivalence(Outcome& out) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FrontierConfig whole;
  whole.split_extent_deg = 360.0;
  for (int trial = 0; trial < 100; ++trial) {
    OccupancyMap map(50, 50, 0.1);
    const double density = 0.2 + 0.6 * u(rng);
    for (int r = 0; r < 50; ++r) {
      for (int c = 0; c < 50; ++c) {
        const double x = u(rng);
        if (x < density) {
          map.set_state(Cell{r, c}, MapCell::Free);
          map.set_explored(Cell{r, c}, u(rng) < 0.7);
        } else if (x < density + 0.1) {
          map.set_state(Cell{r, c}, MapCell::Occupied);
        }
      }
    }
    const CellSet bnd = oracle::boundary(map);
    out.expect(boundary_cells(map) == bnd, "boundary mismatch on mask " + std::to_string(trial));
    out.expect(dbscan_cells(bnd, 2.0, 4) == oracle::dbscan(bnd, 2.0, 4), "DBSCAN mismatch on mask " + std::to_string(trial));
    std::vector<CellSet> expected;
    for (auto& c : oracle::dbscan(bnd, 2.0, 4)) {
      if (c.size() >= 20) {
        expected.push_back(c);
      }
    }
    auto got = frontier_clusters(map, Pose{2.55, 2.55, 0.0}, whole);
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    out.expect(got == expected, "cluster mismatch on mask " + std::to_string(trial));
  }

  // 15-cell blobs: strips and random compact shapes grown from a seed cell.
  const Scene open = SceneBuilder(60, 60).build();
  const Pose p{3.05, 0.55, 90.0};
  int next_id = 0;
  out.expect(extract_frontiers(strip_map(15), open, p, {}, next_id).empty(), "15-cell strip kept");
  for (int trial = 0; trial < 100; ++trial) {
    OccupancyMap map(60, 60, 0.1);
    std::set<Cell> blob{Cell{30, 30}};
    while (blob.size() < 15) {
      auto it = blob.begin();
      std::advance(it, static_cast<long>(rng() % blob.size()));
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      const int k = static_cast<int>(rng() % 4);
      blob.insert(Cell{it->row + dr[k], it->col + dc[k]});
    }
    for (const auto& c : blob) {
      map.set_state(c, MapCell::Free);
      map.set_explored(c, true);
    }
    out.expect(extract_frontiers(map, open, p, {}, next_id).empty(), "15-cell blob kept, trial " + std::to_string(trial));
  }

  // Repeating an extraction on the same map keeps every id.
  SceneBuilder b(120, 120);
  b.border().wall(1, 60, 50, 61).wall(70, 60, 118, 61).wall(60, 1, 61, 40);
  const Scene s = b.build();
  EpisodeState st;
  st.pose = Pose{2.05, 2.05, 0.0};
  OccupancyMap map = OccupancyMap::for_scene(s);
  FrontierTracker tracker;
  std::size_t checked = 0;
  for (int k = 0; k < 150; ++k) {
    update_map(map, s, st.pose, render_views(s, st.pose));
    const auto first = tracker.update(map, s, st.pose);
    const auto again = tracker.update(map, s, st.pose);
    out.expect(again == first, "repeat extraction changed frontiers at step " + std::to_string(k));
    checked += first.size();
    apply_step(s, st, static_cast<MoveAction>(rng() % 3));
  }
  out.expect(checked > 0, "random walk produced no frontiers");
}

EpisodeLog synthetic_log(const Scene& scene, const Task& task, const std::vector<MoveAction>& actions,
                         const std::vector<int>& ends) {
  EpisodeLog log;
  log.task_id = task.id;
  log.difficulty = task.difficulty;
  log.subtask_count = static_cast<int>(task.subtasks.size());
  EpisodeState st;
  st.pose = task.start;
  std::size_t sub = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    while (sub + 1 < ends.size() && static_cast<int>(i) >= ends[sub]) {
      ++sub;
    }
    StepRecord r;
    r.step = static_cast<int>(i);
    r.subtask = static_cast<int>(sub);
    r.pose = st.pose;
    r.action = actions[i];
    r.views = render_views(scene, st.pose);
    r.frontiers = {{0, st.pose.x + 2.0, st.pose.y}, {1, st.pose.x - 2.0, st.pose.y}};
    apply_step(scene, st, actions[i]);
    log.steps.push_back(r);
  }
  for (std::size_t k = 0; k < ends.size(); ++k) {
    SubtaskRecord s;
    s.index = static_cast<int>(k);
    s.goal_tag = task.subtasks[k].goal_tag;
    s.end_step = ends[k];
    s.end_pose = log.steps[static_cast<std::size_t>(ends[k] - 1)].pose;
    s.end_views = render_views(scene, s.end_pose);
    log.subtasks.push_back(s);
  }
  return log;
}

void check_sample_invariants(Outcome& out, const EpisodeLog& log, const PipelineResult& r, const EngineConfig& cfg) {
  std::vector<MoveAction> actions;
  for (const auto& st : log.steps) {
    actions.push_back(st.action);
  }
  for (const auto& smp : r.samples) {
    out.expect(uniform_window(actions, static_cast<std::size_t>(smp.step), cfg.pipeline.window),
               log.task_id + ": window not uniform at step " + std::to_string(smp.step));
    out.expect(smp.bank_size <= r.bank.size(), log.task_id + ": bank prefix larger than bank");
    const MemoryBank prefix = r.bank.prefix(smp.bank_size);
    for (const auto& e : prefix.entries()) {
      out.expect(e.step <= smp.step, log.task_id + ": prefix bank holds a future memory");
    }
  }
}

void pipeline_counts(Outcome& out) {
  const Scene s = SceneBuilder(400, 40).object("lamp", 30.05, 2.05).object("vase", 35.05, 2.05).build();
  const Task t = goal_task(s, Pose{0.55, 2.05, 0.0}, {"lamp", "vase"});
  EngineConfig cfg;
  out.expect(cfg.pipeline.action_interval == 20 && cfg.pipeline.window == 6, "default S/W");
  const HashingProvider provider;
  const auto uniform = synthetic_log(s, t, std::vector<MoveAction>(100, MoveAction::Forward), {50, 100});
  const auto r = build_samples(uniform, t, cfg, provider);
  out.expect(r.samples.size() == 5, "uniform trajectory gave " + std::to_string(r.samples.size()) + " samples");
  check_sample_invariants(out, uniform, r, cfg);
  std::vector<MoveAction> alt;
  for (int i = 0; i < 100; ++i) {
    alt.push_back(i % 2 == 0 ? MoveAction::Forward : MoveAction::TurnLeft);
  }
  const auto ra = build_samples(synthetic_log(s, t, alt, {50, 100}), t, cfg, provider);
  out.expect(ra.samples.empty(), "alternating trajectory gave samples");

  const RuleJudge judge;
  std::size_t total = 0;
  for (const auto& e : list_suite(suite_dir())) {
    const Scene scene = load_scene(e.scene_path);
    const Task task = load_task(e.task_path);
    auto policy = make_policy("greedy", cfg);
    const auto log = run_episode(scene, task, *policy, cfg, 1, provider, judge);
    const auto res = build_samples(log, task, cfg, provider);
    check_sample_invariants(out, log, res, cfg);
    total += res.samples.size();
  }
  out.expect(total > 0, "suite produced no samples");
}

double qa_accuracy(const SuiteRun& run) {
  int correct = 0;
  int total = 0;
  for (const auto& log : run.logs) {
    for (const auto& q : log.qa) {
      correct += q.correct ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : 100.0 * correct / total;
}

void metric_identities(Outcome& out) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SubtaskOutcome> os;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const double l = u(rng);
      os.push_back(SubtaskOutcome{Difficulty::Easy, rng() % 2 == 0, l + u(rng), rng() % 10 == 0 ? -1.0 : l});
    }
    out.expect(spl(os) <= success_rate(os), "SPL > SR on set " + std::to_string(trial));
  }
  const EngineConfig cfg;
  const auto entries = list_suite(suite_dir());
  out.expect(entries.size() == 20, "suite does not hold 20 tasks");
  const auto run = run_suite(entries, "oracle", cfg, 0, 1, HashingProvider{}, RuleJudge{});
  out.expect(run.failures.empty() && run.logs.size() == entries.size(), "oracle run had failures");
  for (const auto& log : run.logs) {
    for (const auto& s : log.subtasks) {
      out.expect(s.success, log.task_id + " subtask " + std::to_string(s.index) + " failed");
      const double term = spl_term(SubtaskOutcome{log.difficulty, s.success, s.path_length, s.shortest});
      out.expect(std::abs(term - 1.0) <= 1e-9, log.task_id + " subtask " + std::to_string(s.index) + " SPL term " +
                                                   std::to_string(term));
    }
  }
  const auto report = build_report(run.logs, "oracle", nlohmann::json::object());
  out.expect(report.rows[3].sr() == 100.0, "oracle SR below 100");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

void baseline_ordering(Outcome& out) {
  const EngineConfig cfg;
  const auto entries = list_suite(suite_dir());
  const HashingProvider provider;
  const RuleJudge judge;
  auto sr = [&](const std::string& spec) {
    const auto run = run_suite(entries, spec, cfg, 0, 1, provider, judge);
    return *build_report(run.logs, spec, nlohmann::json::object()).rows[3].sr();
  };
  const double greedy = sr("greedy");
  const double random = sr("random");
  const double qa_mem = qa_accuracy(run_suite(entries, "oracle", cfg, 0, 1, provider, judge));
  const double qa_none = qa_accuracy(run_suite(entries, "oracle-noretrieval", cfg, 0, 1, provider, judge));
  std::printf("     SR greedy %s random %s; QA oracle %s no-retrieval %s\n", fmt(greedy).c_str(), fmt(random).c_str(),
              fmt(qa_mem).c_str(), fmt(qa_none).c_str());
  out.expect(greedy - random >= 10.0, "SR margin " + fmt(greedy - random) + " < 10");
  out.expect(qa_mem - qa_none >= 20.0, "QA margin " + fmt(qa_mem - qa_none) + " < 20");
}

void determinism(Outcome& out) {
  const EngineConfig cfg;
  const auto all = list_suite(suite_dir());
  const std::vector<SuiteEntry> entries(all.begin(), all.begin() + 6);
  for (const char* spec : {"random", "greedy", "oracle"}) {
    for (std::uint64_t seed : {0ULL, 41ULL}) {
      const auto a = run_suite(entries, spec, cfg, seed, 1, HashingProvider{}, RuleJudge{});
      const auto b = run_suite(entries, spec, cfg, seed, 2, HashingProvider{}, RuleJudge{});
      out.expect(a.logs.size() == b.logs.size(), std::string(spec) + ": log count differs");
      for (std::size_t i = 0; i < a.logs.size() && i < b.logs.size(); ++i) {
        out.expect(log_to_jsonl(a.logs[i]) == log_to_jsonl(b.logs[i]), std::string(spec) + ": log " +
                                                                            a.logs[i].task_id + " differs");
      }
      const auto ra = report_to_json(build_report(a.logs, spec, config_to_json(cfg))).dump();
      const auto rb = report_to_json(build_report(b.logs, spec, config_to_json(cfg))).dump();
      out.expect(ra == rb, std::string(spec) + ": report differs");
    }
  }
}

}  // namespace

int main() {
  criterion("reward_oracle_table", 1.0, reward_table);
  criterion("retrieval_equivalence", 30.0, retrieval_equivalence);
  criterion("similarity_identities", 0.0, similarity_identities);
  criterion("dbscan_frontier_equivalence", 0.0, frontier_equivalence);
  criterion("sample_construction_counts", 0.0, pipeline_counts);
  criterion("metric_identities", 120.0, metric_identities);
  criterion("baseline_ordering", 0.0, baseline_ordering);
  criterion("determinism", 0.0, determinism);
  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
