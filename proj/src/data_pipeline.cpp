#include "memexplore/data_pipeline.hpp"

#include <limits>
#include <random>
#include <set>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"
#include "memexplore/protocol.hpp"
#include "memexplore/retrieval.hpp"

namespace memexplore {

using nlohmann::json;

bool uniform_window(const std::vector<MoveAction>& actions, std::size_t i, int window) {
  if (window < 1 || i + static_cast<std::size_t>(window) > actions.size()) {
    return false;
  }
  for (std::size_t k = i + 1; k < i + static_cast<std::size_t>(window); ++k) {
    if (actions[k] != actions[i]) {
      return false;
    }
  }
  return true;
}

namespace {

int nearest_frontier(const std::vector<FrontierRef>& frontiers, const Pose& goal) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& f : frontiers) {
    const double d = euclidean(f.x, f.y, goal.x, goal.y);
    if (d < best_d || (d == best_d && f.id < best)) {
      best_d = d;
      best = f.id;
    }
  }
  return best;
}

}  // namespace

PipelineResult build_samples(const EpisodeLog& log, const Task& task, const EngineConfig& cfg,
                             const EmbeddingProvider& provider) {
  if (log.task_id != task.id) {
    throw ContractViolation("build_samples: log is for task '" + log.task_id + "', not '" + task.id + "'");
  }
  const int S = cfg.pipeline.action_interval;
  const int W = cfg.pipeline.window;
  if (S < 0 || W < 1) {
    throw ContractViolation("build_samples: action interval must be >= 0 and window >= 1");
  }
  std::vector<MoveAction> actions;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (log.steps[i].step != static_cast<int>(i)) {
      throw InvariantError("build_samples: step records are not consecutive at index " + std::to_string(i));
    }
    actions.push_back(log.steps[i].action);
  }

  PipelineResult out{{}, MemoryBank(cfg.novelty)};
  MemoryBank& bank = out.bank;
  std::mt19937_64 rng(episode_seed(cfg.pipeline.qa_seed, task.id));
  std::optional<int> last_sample;
  std::size_t next_goal = 0;  // next subtask whose goal memory is pending
  std::set<std::string> finished_goals;

  auto flush_goals = [&](int upto_step) {
    while (next_goal < log.subtasks.size() && log.subtasks[next_goal].end_step <= upto_step) {
      const auto& s = log.subtasks[next_goal];
      if (s.end_reason != EndReason::Abort) {
        bank.force_goal_memory(observe(s.end_pose, s.end_views, s.end_step, provider));
      }
      finished_goals.insert(s.goal_tag);
      ++next_goal;
    }
  };

  const int T = static_cast<int>(log.steps.size());
  for (int i = 0; i < T; ++i) {
    flush_goals(i);
    const auto& rec = log.steps[static_cast<std::size_t>(i)];
    bank.maybe_insert(observe(rec.pose, rec.views, i, provider));

    if (!uniform_window(actions, static_cast<std::size_t>(i), W)) {
      continue;
    }
    if (last_sample && i - *last_sample < S) {
      continue;
    }
    last_sample = i;

    TrainingSample sample;
    sample.task_id = task.id;
    sample.step = i;
    sample.difficulty = task.difficulty;
    sample.instruction = task.instruction;
    sample.subtask_index = rec.subtask;
    const auto& goal = task.subtasks.at(static_cast<std::size_t>(rec.subtask));
    sample.subtask = goal.descriptor;
    sample.pose = rec.pose;
    sample.views = rec.views;
    sample.frontiers = rec.frontiers;
    sample.bank_size = bank.size();
    sample.trajectory_steps = T;
    sample.label.next_action = rec.action;
    sample.label.gt_frontier_id = nearest_frontier(rec.frontiers, goal.goal_pose);

    std::vector<std::size_t> candidates;
    for (std::size_t q = 0; q < task.questions.size(); ++q) {
      if (finished_goals.count(task.questions[q].goal_tag) != 0) {
        candidates.push_back(q);
      }
    }
    if (!candidates.empty()) {
      const std::size_t q = candidates[rng() % candidates.size()];
      const auto& item = task.questions[q];
      sample.question = QuestionInfo{static_cast<int>(q), item.question, item.qtype, item.format, item.choices};
      sample.label.answer = item.answer;
      if (!bank.empty() && !tokenize(item.question).empty()) {
        sample.memory_hint = retrieve(bank, item.question, provider, cfg.retrieval).ids();
      }
    }
    out.samples.push_back(std::move(sample));
  }
  flush_goals(std::numeric_limits<int>::max());
  return out;
}

DatasetStats dataset_stats(const std::vector<TrainingSample>& samples) {
  DatasetStats s;
  s.samples = samples.size();
  std::map<std::string, int> steps_by_task;
  for (const auto& x : samples) {
    ++s.per_difficulty[std::string(to_string(x.difficulty))];
    ++s.per_action[std::string(to_string(x.label.next_action))];
    if (x.question) {
      ++s.per_qtype[std::string(to_string(x.question->qtype))];
      ++s.with_question;
    }
    steps_by_task[x.task_id] = x.trajectory_steps;
  }
  s.tasks = steps_by_task.size();
  if (!steps_by_task.empty()) {
    long long total = 0;
    for (const auto& [_, n] : steps_by_task) {
      total += n;
    }
    s.avg_steps_per_task = static_cast<double>(total) / static_cast<double>(steps_by_task.size());
  }
  return s;
}

json sample_to_json(const TrainingSample& s) {
  json j;
  j["task_id"] = s.task_id;
  j["step"] = s.step;
  j["difficulty"] = std::string(to_string(s.difficulty));
  json prompt;
  prompt["instruction"] = s.instruction;
  prompt["subtask_index"] = s.subtask_index;
  prompt["subtask"] = s.subtask;
  prompt["pose"] = json_io::to_json(s.pose);
  prompt["views"] = json::array();
  for (const auto& v : s.views) {
    prompt["views"].push_back(view_to_json(v));
  }
  prompt["frontiers"] = json::array();
  for (const auto& f : s.frontiers) {
    prompt["frontiers"].push_back(json{{"id", f.id}, {"x", f.x}, {"y", f.y}});
  }
  if (s.question) {
    prompt["question"] = json{{"index", s.question->index},
                              {"text", s.question->question},
                              {"qtype", std::string(to_string(s.question->qtype))},
                              {"format", std::string(to_string(s.question->format))},
                              {"choices", s.question->choices}};
  }
  prompt["memory_hint"] = s.memory_hint;
  j["prompt"] = prompt;
  j["bank_size"] = s.bank_size;
  j["trajectory_steps"] = s.trajectory_steps;
  j["label"] = json{{"next_action", std::string(to_string(s.label.next_action))},
                    {"gt_frontier_id", s.label.gt_frontier_id},
                    {"answer", s.label.answer}};
  return j;
}

TrainingSample sample_from_json(const json& j) {
  const std::string w = "sample";
  TrainingSample s;
  s.task_id = json_io::string(j, "task_id", w);
  s.step = json_io::integer(j, "step", w);
  const auto d = parse_difficulty(json_io::string(j, "difficulty", w));
  if (!d) {
    throw ParseError("sample.difficulty: unknown value");
  }
  s.difficulty = *d;
  const auto& p = j.at("prompt");
  s.instruction = json_io::string(p, "instruction", "sample.prompt");
  s.subtask_index = json_io::integer(p, "subtask_index", "sample.prompt");
  s.subtask = json_io::string(p, "subtask", "sample.prompt");
  s.pose = json_io::pose(p.at("pose"), "sample.prompt.pose");
  for (std::size_t i = 0; i < 3; ++i) {
    s.views[i] = view_from_json(p.at("views").at(i), "sample.prompt.views");
  }
  for (const auto& f : p.at("frontiers")) {
    s.frontiers.push_back(FrontierRef{json_io::integer(f, "id", "sample.frontiers"),
                                      json_io::number(f, "x", "sample.frontiers"),
                                      json_io::number(f, "y", "sample.frontiers")});
  }
  if (p.contains("question")) {
    const auto& q = p["question"];
    QuestionInfo info;
    info.index = json_io::integer(q, "index", "sample.question");
    info.question = json_io::string(q, "text", "sample.question");
    const auto qt = parse_question_type(json_io::string(q, "qtype", "sample.question"));
    const auto fmt = parse_answer_format(json_io::string(q, "format", "sample.question"));
    if (!qt || !fmt) {
      throw ParseError("sample.question: unknown qtype or format");
    }
    info.qtype = *qt;
    info.format = *fmt;
    info.choices = json_io::string_list(q.at("choices"), "sample.question.choices");
    s.question = info;
  }
  for (const auto& id : p.at("memory_hint")) {
    s.memory_hint.push_back(id.get<int>());
  }
  s.bank_size = j.at("bank_size").get<std::size_t>();
  s.trajectory_steps = json_io::integer(j, "trajectory_steps", w);
  const auto& l = j.at("label");
  const auto act = parse_action(json_io::string(l, "next_action", "sample.label"));
  if (!act) {
    throw ParseError("sample.label.next_action: unknown action");
  }
  s.label.next_action = *act;
  s.label.gt_frontier_id = json_io::integer(l, "gt_frontier_id", "sample.label");
  s.label.answer = json_io::string(l, "answer", "sample.label");
  return s;
}

json stats_to_json(const DatasetStats& s) {
  return json{{"samples", s.samples},
              {"tasks", s.tasks},
              {"avg_steps_per_task", s.avg_steps_per_task},
              {"per_difficulty", s.per_difficulty},
              {"per_qtype", s.per_qtype},
              {"per_action", s.per_action},
              {"with_question", s.with_question}};
}

}  // namespace memexplore
