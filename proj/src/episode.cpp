#include "memexplore/episode.hpp"

#include <algorithm>

#include "memexplore/error.hpp"
#include "memexplore/frontier.hpp"
#include "memexplore/json_io.hpp"
#include "memexplore/occupancy.hpp"
#include "memexplore/protocol.hpp"
#include "memexplore/simulator.hpp"

namespace memexplore {

using nlohmann::json;

std::string_view to_string(EndReason r) {
  switch (r) {
    case EndReason::Success:
      return "success";
    case EndReason::Stop:
      return "stop";
    case EndReason::Budget:
      return "budget";
    case EndReason::Abort:
      return "abort";
  }
  return "?";
}

std::optional<EndReason> parse_end_reason(std::string_view s) {
  for (EndReason r : {EndReason::Success, EndReason::Stop, EndReason::Budget, EndReason::Abort}) {
    if (to_string(r) == s) {
      return r;
    }
  }
  return std::nullopt;
}

namespace {

std::vector<MemoryRecord> memory_records(const MemoryBank& bank, const RetrievalResult& result) {
  std::vector<MemoryRecord> out;
  for (const auto& r : result.entries) {
    const auto& e = bank.entries().at(static_cast<std::size_t>(r.index));
    out.push_back(MemoryRecord{r.index, e.caption, e.pose, r.score, r.channel});
  }
  return out;
}

// Runs one decision with the single-round tool contract. Returns the final
// response and fills `tool` when a call happened.
AgentResponse decide_with_tool(Policy& policy, StepRequest request, RetrievalTool& tool, const MemoryBank& bank,
                               std::optional<ToolRecord>& record) {
  tool.begin_step();
  AgentResponse first = policy.decide(request);
  if (!first.tool_call && !first.tool_call_malformed) {
    return first;
  }
  const ToolOutcome outcome = tool.handle(first);
  ToolRecord rec;
  rec.query = first.tool_call ? first.tool_call->query : std::string();
  request.round = 2;
  if (outcome.ok()) {
    rec.retrieved_ids = outcome.result->ids();
    request.memories = memory_records(bank, *outcome.result);
  } else {
    rec.failure = std::string(to_string(*outcome.failure));
    request.memories = std::vector<MemoryRecord>{};
    request.tool_error = rec.failure;
  }
  record = rec;
  AgentResponse second = policy.decide(request);
  if (second.tool_call || second.tool_call_malformed) {
    throw ProtocolViolation("second tool call within one decision step");
  }
  return second;
}

std::vector<FrontierInfo> frontier_infos(const std::vector<Frontier>& frontiers, const OccupancyMap& map,
                                         const Pose& pose) {
  std::vector<FrontierInfo> out;
  if (frontiers.empty()) {
    return out;
  }
  const auto field = known_distance_field(map, cell_of(pose.x, pose.y, map.cell_size()));
  for (const auto& f : frontiers) {
    FrontierInfo info;
    info.id = f.id;
    info.nav_point = f.nav_point;
    info.steering_bearing = steering_bearing(pose, f.nav_point.x, f.nav_point.y);
    info.distance = euclidean(pose.x, pose.y, f.nav_point.x, f.nav_point.y);
    const Cell c = cell_of(f.nav_point.x, f.nav_point.y, map.cell_size());
    info.geodesic = map.in_bounds(c) ? field[map.index(c)] : -1.0;
    info.snapshot = f.snapshot;
    out.push_back(std::move(info));
  }
  return out;
}

QuestionInfo question_info(const Task& task, std::size_t i) {
  const auto& q = task.questions[i];
  return QuestionInfo{static_cast<int>(i), q.question, q.qtype, q.format, q.choices};
}

}  // namespace

EpisodeLog run_episode(const Scene& scene, const Task& task, Policy& policy, const EngineConfig& cfg,
                       std::uint64_t seed, const EmbeddingProvider& provider, const Judge& judge,
                       MemoryBank* bank_out) {
  validate_task(task);
  if (cfg.budget_per_subtask < 1) {
    throw ContractViolation("run_episode: budget must be >= 1");
  }
  if (!scene.is_free(task.start.x, task.start.y)) {
    throw InvariantError("task " + task.id + ": start pose is not on a Free cell");
  }

  EpisodeLog log;
  log.version = version_string();
  log.config = config_to_json(cfg);
  log.task_id = task.id;
  log.policy = policy.name();
  log.seed = seed;
  log.difficulty = task.difficulty;
  log.subtask_count = static_cast<int>(task.subtasks.size());

  OccupancyMap map = OccupancyMap::for_scene(scene);
  FrontierTracker tracker(cfg.frontier, cfg.views);
  MemoryBank bank(cfg.novelty);
  RetrievalTool tool(bank, provider, cfg.retrieval);
  EpisodeState state;
  state.pose = task.start;

  EpisodeContext ctx{&scene, &task, seed, cfg};
  policy.begin_episode(ctx);

  std::size_t next_subtask = 0;
  std::size_t next_question = 0;
  Pose current_start = state.pose;
  double current_shortest = -1.0;
  int forwards = 0;
  try {
    for (; next_subtask < task.subtasks.size(); ++next_subtask) {
      const auto& goal = task.subtasks[next_subtask];
      SubtaskRecord rec;
      rec.index = static_cast<int>(next_subtask);
      rec.goal_tag = goal.goal_tag;
      rec.start_pose = state.pose;
      rec.shortest = geodesic_distance(scene, state.pose, goal.goal_pose).value_or(-1.0);
      current_start = rec.start_pose;
      current_shortest = rec.shortest;
      forwards = 0;
      state.done = false;
      state.subtask_index = rec.index;
      rec.end_reason = EndReason::Budget;

      while (rec.steps < cfg.budget_per_subtask) {
        const ViewTriplet views = render_views(scene, state.pose, cfg.views);
        update_map(map, scene, state.pose, views, cfg.sensor);
        const auto& frontiers = tracker.update(map, scene, state.pose);

        StepRecord step;
        step.step = state.step;
        step.subtask = rec.index;
        step.pose = state.pose;
        step.views = views;
        for (const auto& f : frontiers) {
          step.frontiers.push_back(FrontierRef{f.id, f.nav_point.x, f.nav_point.y});
        }
        MemoryEvent event;
        event.outcome = bank.maybe_insert(observe(state.pose, views, state.step, provider));
        if (event.outcome == InsertOutcome::Inserted) {
          event.index = bank.entries().back().index;
        }
        step.memory_event = event;

        StepRequest request;
        request.type = RequestType::Step;
        request.step = state.step;
        request.subtask_index = rec.index;
        request.instruction = task.instruction;
        request.subtask = goal.descriptor;
        request.target = goal.goal_tag;
        request.pose = state.pose;
        request.views = views;
        request.frontiers = frontier_infos(frontiers, map, state.pose);
        request.budget = cfg.budget_per_subtask - rec.steps;

        const AgentResponse response = decide_with_tool(policy, std::move(request), tool, bank, step.tool);
        if (!response.action) {
          throw ProtocolViolation("response carries no valid action: '" + response.raw.substr(0, 200) + "'");
        }
        step.action = *response.action;
        step.frontier_choice = response.frontier_id;
        step.response = response.raw;
        step.blocked = step.action == MoveAction::Forward && forward_blocked(scene, state.pose);
        apply_step(scene, state, step.action);
        if (step.action == MoveAction::Forward && !step.blocked) {
          ++forwards;
        }
        ++rec.steps;
        log.steps.push_back(std::move(step));

        if (state.done) {
          rec.end_reason = check_success(state.pose, goal) ? EndReason::Success : EndReason::Stop;
          break;
        }
        if (check_success(state.pose, goal)) {
          rec.end_reason = EndReason::Success;
          break;
        }
      }
      rec.success = rec.end_reason == EndReason::Success;
      rec.path_length = forwards * kForwardStep;
      rec.end_step = state.step;
      rec.end_pose = state.pose;
      rec.end_views = render_views(scene, state.pose, cfg.views);
      rec.goal_memory_index = bank.force_goal_memory(observe(state.pose, rec.end_views, state.step, provider));
      log.subtasks.push_back(std::move(rec));
    }

    const ViewTriplet final_views = render_views(scene, state.pose, cfg.views);
    for (; next_question < task.questions.size(); ++next_question) {
      const auto& item = task.questions[next_question];
      StepRequest request;
      request.type = RequestType::QA;
      request.step = state.step;
      request.subtask_index = static_cast<int>(task.subtasks.size()) - 1;
      request.instruction = task.instruction;
      request.pose = state.pose;
      request.views = final_views;
      request.question = question_info(task, next_question);
      QARecord qa;
      qa.question_index = static_cast<int>(next_question);
      qa.question = item.question;
      qa.qtype = item.qtype;
      qa.format = item.format;
      qa.reference = item.answer;
      const AgentResponse response = decide_with_tool(policy, std::move(request), tool, bank, qa.tool);
      qa.answer = response.answer.value_or("");
      qa.correct = item.format == AnswerFormat::Choice ? choice_match(qa.answer, item.answer)
                                                       : judge.score(item.question, item.answer, qa.answer, "") == 5;
      std::string goal_observation;
      for (const auto& s : log.subtasks) {
        if (s.goal_tag == item.goal_tag) {
          goal_observation = caption_for(s.end_views);
        }
      }
      qa.judge_score = judge.score(item.question, item.answer, qa.answer, goal_observation);
      log.qa.push_back(std::move(qa));
    }
  } catch (const ProtocolViolation& e) {
    log.abort_reason = e.what();
    for (bool first = true; next_subtask < task.subtasks.size(); ++next_subtask, first = false) {
      SubtaskRecord rec;
      rec.index = static_cast<int>(next_subtask);
      rec.goal_tag = task.subtasks[next_subtask].goal_tag;
      rec.start_pose = first ? current_start : state.pose;
      rec.end_pose = state.pose;
      rec.shortest = first ? current_shortest
                           : geodesic_distance(scene, state.pose, task.subtasks[next_subtask].goal_pose).value_or(-1.0);
      rec.path_length = first ? forwards * kForwardStep : 0.0;
      rec.end_reason = EndReason::Abort;
      rec.end_step = state.step;
      rec.steps = static_cast<int>(std::count_if(log.steps.begin(), log.steps.end(), [&](const StepRecord& s) {
        return s.subtask == rec.index;
      }));
      log.subtasks.push_back(std::move(rec));
    }
    for (; next_question < task.questions.size(); ++next_question) {
      const auto& item = task.questions[next_question];
      QARecord qa;
      qa.question_index = static_cast<int>(next_question);
      qa.question = item.question;
      qa.qtype = item.qtype;
      qa.format = item.format;
      qa.reference = item.answer;
      qa.judge_score = 1;
      log.qa.push_back(std::move(qa));
    }
  }
  policy.end_episode();
  if (bank_out != nullptr) {
    *bank_out = bank;
  }
  return log;
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

json views_to_json(const ViewTriplet& views) {
  json arr = json::array();
  for (const auto& v : views) {
    arr.push_back(view_to_json(v));
  }
  return arr;
}

ViewTriplet views_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(where + ": expected 3 views");
  }
  ViewTriplet out;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = view_from_json(j[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

json tool_to_json(const ToolRecord& t) {
  json j{{"query", t.query}, {"retrieved_ids", t.retrieved_ids}};
  if (t.failure) {
    j["failure"] = *t.failure;
  }
  return j;
}

ToolRecord tool_from_json(const json& j, const std::string& where) {
  ToolRecord t;
  t.query = json_io::string(j, "query", where, "");
  if (j.contains("retrieved_ids")) {
    for (const auto& v : j["retrieved_ids"]) {
      if (!v.is_number_integer()) {
        throw ParseError(where + ".retrieved_ids: expected integers");
      }
      t.retrieved_ids.push_back(v.get<int>());
    }
  }
  if (j.contains("failure")) {
    t.failure = json_io::string(j, "failure", where);
  }
  return t;
}

json subtask_to_json(const SubtaskRecord& s) {
  return json{{"type", "subtask"},
              {"index", s.index},
              {"goal_tag", s.goal_tag},
              {"success", s.success},
              {"path_length", s.path_length},
              {"shortest", s.shortest},
              {"steps", s.steps},
              {"end_reason", std::string(to_string(s.end_reason))},
              {"end_step", s.end_step},
              {"start_pose", json_io::to_json(s.start_pose)},
              {"end_pose", json_io::to_json(s.end_pose)},
              {"end_views", views_to_json(s.end_views)},
              {"goal_memory_index", s.goal_memory_index}};
}

SubtaskRecord subtask_from_json(const json& j, const std::string& w) {
  SubtaskRecord s;
  s.index = json_io::integer(j, "index", w);
  s.goal_tag = json_io::string(j, "goal_tag", w);
  s.success = json_io::boolean(j, "success", w);
  s.path_length = json_io::number(j, "path_length", w);
  s.shortest = json_io::number(j, "shortest", w);
  s.steps = json_io::integer(j, "steps", w);
  const auto reason = parse_end_reason(json_io::string(j, "end_reason", w));
  if (!reason) {
    throw ParseError(w + ".end_reason: unknown value");
  }
  s.end_reason = *reason;
  s.end_step = json_io::integer(j, "end_step", w);
  s.start_pose = json_io::pose(j.at("start_pose"), w + ".start_pose");
  s.end_pose = json_io::pose(j.at("end_pose"), w + ".end_pose");
  if (j.contains("end_views")) {
    s.end_views = views_from_json(j["end_views"], w + ".end_views");
  }
  s.goal_memory_index = json_io::integer(j, "goal_memory_index", w, -1);
  return s;
}

json qa_to_json(const QARecord& q) {
  json j{{"type", "qa"},
         {"question_index", q.question_index},
         {"question", q.question},
         {"qtype", std::string(to_string(q.qtype))},
         {"format", std::string(to_string(q.format))},
         {"answer", q.answer},
         {"reference", q.reference},
         {"correct", q.correct},
         {"judge_score", q.judge_score},
         {"retrieved_ids", q.tool ? q.tool->retrieved_ids : std::vector<int>{}}};
  if (q.tool) {
    j["tool"] = tool_to_json(*q.tool);
  }
  return j;
}

QARecord qa_from_json(const json& j, const std::string& w) {
  QARecord q;
  q.question_index = json_io::integer(j, "question_index", w);
  q.question = json_io::string(j, "question", w);
  const auto qt = parse_question_type(json_io::string(j, "qtype", w));
  const auto fmt = parse_answer_format(json_io::string(j, "format", w));
  if (!qt || !fmt) {
    throw ParseError(w + ": unknown qtype or format");
  }
  q.qtype = *qt;
  q.format = *fmt;
  q.answer = json_io::string(j, "answer", w);
  q.reference = json_io::string(j, "reference", w);
  q.correct = json_io::boolean(j, "correct", w);
  q.judge_score = json_io::integer(j, "judge_score", w);
  if (j.contains("tool")) {
    q.tool = tool_from_json(j["tool"], w + ".tool");
  }
  return q;
}

}  // namespace

json step_to_json(const StepRecord& r) {
  json j;
  j["type"] = "step";
  j["step"] = r.step;
  j["subtask"] = r.subtask;
  j["pose"] = json_io::to_json(r.pose);
  j["action"] = std::string(to_string(r.action));
  j["blocked"] = r.blocked;
  j["views"] = views_to_json(r.views);
  json ids = json::array();
  json fr = json::array();
  for (const auto& f : r.frontiers) {
    ids.push_back(f.id);
    fr.push_back(json{{"id", f.id}, {"x", f.x}, {"y", f.y}});
  }
  j["frontier_ids"] = ids;
  j["frontiers"] = fr;
  if (r.frontier_choice) {
    j["frontier_choice"] = *r.frontier_choice;
  }
  if (r.memory_event) {
    json m{{"outcome", std::string(to_string(r.memory_event->outcome))}};
    if (r.memory_event->index >= 0) {
      m["index"] = r.memory_event->index;
    }
    j["memory_event"] = m;
  }
  if (r.tool) {
    j["tool"] = tool_to_json(*r.tool);
  }
  j["response"] = r.response;
  return j;
}

StepRecord step_from_json(const json& j, std::string_view where) {
  const std::string w(where);
  StepRecord r;
  r.step = json_io::integer(j, "step", w);
  r.subtask = json_io::integer(j, "subtask", w);
  if (!j.contains("pose")) {
    throw ParseError(w + ": missing 'pose'");
  }
  r.pose = json_io::pose(j["pose"], w + ".pose");
  const auto act_text = json_io::string(j, "action", w);
  const auto act = parse_action(act_text);
  if (!act) {
    throw ParseError(w + ".action: unknown action '" + act_text + "'");
  }
  r.action = *act;
  r.blocked = json_io::boolean(j, "blocked", w, false);
  if (!j.contains("views")) {
    throw ParseError(w + ": missing 'views'");
  }
  r.views = views_from_json(j["views"], w + ".views");
  if (j.contains("frontiers")) {
    for (const auto& f : j["frontiers"]) {
      r.frontiers.push_back(FrontierRef{json_io::integer(f, "id", w + ".frontiers"),
                                        json_io::number(f, "x", w + ".frontiers"),
                                        json_io::number(f, "y", w + ".frontiers")});
    }
  } else if (j.contains("frontier_ids")) {
    for (const auto& id : j["frontier_ids"]) {
      r.frontiers.push_back(FrontierRef{id.get<int>(), 0.0, 0.0});
    }
  }
  if (j.contains("frontier_choice")) {
    r.frontier_choice = json_io::integer(j, "frontier_choice", w);
  }
  if (j.contains("memory_event")) {
    const auto& m = j["memory_event"];
    const auto outcome = json_io::string(m, "outcome", w + ".memory_event");
    MemoryEvent ev;
    if (outcome == "inserted") {
      ev.outcome = InsertOutcome::Inserted;
    } else if (outcome == "skipped_interval") {
      ev.outcome = InsertOutcome::SkippedInterval;
    } else if (outcome == "rejected_redundant") {
      ev.outcome = InsertOutcome::RejectedRedundant;
    } else {
      throw ParseError(w + ".memory_event.outcome: unknown value '" + outcome + "'");
    }
    ev.index = json_io::integer(m, "index", w + ".memory_event", -1);
    r.memory_event = ev;
  }
  if (j.contains("tool")) {
    r.tool = tool_from_json(j["tool"], w + ".tool");
  }
  r.response = json_io::string(j, "response", w, "");
  return r;
}

std::string log_to_jsonl(const EpisodeLog& log) {
  std::string out;
  auto emit = [&out](const json& j) {
    out += j.dump();
    out += '\n';
  };
  emit(json{{"type", "header"},
            {"log_version", kLogVersion},
            {"version", log.version},
            {"config", log.config},
            {"task_id", log.task_id},
            {"policy", log.policy},
            {"seed", log.seed},
            {"difficulty", std::string(to_string(log.difficulty))},
            {"subtask_count", log.subtask_count}});
  std::size_t s = 0;
  for (const auto& step : log.steps) {
    while (s < log.subtasks.size() && log.subtasks[s].end_step <= step.step) {
      emit(subtask_to_json(log.subtasks[s++]));
    }
    emit(step_to_json(step));
  }
  for (; s < log.subtasks.size(); ++s) {
    emit(subtask_to_json(log.subtasks[s]));
  }
  for (const auto& q : log.qa) {
    emit(qa_to_json(q));
  }
  if (log.abort_reason) {
    emit(json{{"type", "abort"}, {"reason", *log.abort_reason}});
  }
  return out;
}

EpisodeLog log_from_jsonl(std::string_view text) {
  EpisodeLog log;
  bool header = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    const std::string w = "log line " + std::to_string(line_no);
    const json j = json_io::parse(line, w);
    const auto type = json_io::string(j, "type", w);
    if (type == "header") {
      header = true;
      log.version = json_io::string(j, "version", w, "");
      log.config = j.contains("config") ? j["config"] : json::object();
      log.task_id = json_io::string(j, "task_id", w);
      log.policy = json_io::string(j, "policy", w, "");
      log.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
      const auto d = parse_difficulty(json_io::string(j, "difficulty", w, "easy"));
      if (!d) {
        throw ParseError(w + ".difficulty: unknown value");
      }
      log.difficulty = *d;
      log.subtask_count = json_io::integer(j, "subtask_count", w, 0);
    } else if (type == "step") {
      log.steps.push_back(step_from_json(j, w));
    } else if (type == "subtask") {
      log.subtasks.push_back(subtask_from_json(j, w));
    } else if (type == "qa") {
      log.qa.push_back(qa_from_json(j, w));
    } else if (type == "abort") {
      log.abort_reason = json_io::string(j, "reason", w);
    } else {
      throw ParseError(w + ".type: unknown record type '" + type + "'");
    }
  }
  if (!header) {
    throw ParseError("episode log: missing header record");
  }
  return log;
}

void save_log(const EpisodeLog& log, const std::filesystem::path& path) {
  json_io::write_atomically(path, log_to_jsonl(log));
}

EpisodeLog load_log(const std::filesystem::path& path) {
  return log_from_jsonl(json_io::read_text(path));
}

}  // namespace memexplore
