#include "memexplore/scene.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "json.hpp"
#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

using nlohmann::json;

Scene::Scene(int width, int height, double cell_size, std::vector<CellState> cells,
             std::vector<SceneObject> objects)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      cells_(std::move(cells)),
      objects_(std::move(objects)) {
  if (width_ <= 0 || height_ <= 0) {
    throw InvariantError("scene: width and height must be positive (width=" +
                         std::to_string(width_) + ", height=" + std::to_string(height_) + ")");
  }
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
    throw InvariantError("scene: cell_size must be > 0");
  }
  if (cells_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw InvariantError("scene: cells size does not match width*height");
  }
  if (std::none_of(cells_.begin(), cells_.end(), [](CellState s) { return s == CellState::Free; })) {
    throw InvariantError("scene: cells contain no Free cell");
  }
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    const std::string name = "objects[" + std::to_string(i) + "] (tag '" + obj.tag + "')";
    if (obj.tag.empty()) {
      throw InvariantError("scene: " + name + " has an empty tag");
    }
    if (!in_bounds(obj.pose.x, obj.pose.y)) {
      throw InvariantError("scene: " + name + " lies outside the scene bounds");
    }
    if (!is_free(obj.pose.x, obj.pose.y)) {
      throw InvariantError("scene: " + name + " sits on an Occupied cell");
    }
  }
}

bool Scene::in_bounds(double x, double y) const {
  return x >= 0.0 && y >= 0.0 && x < width_ * cell_size_ && y < height_ * cell_size_ &&
         in_bounds(cell_of(x, y, cell_size_));
}

const SceneObject* Scene::find_object(std::string_view tag) const {
  for (const auto& obj : objects_) {
    if (obj.tag == tag) {
      return &obj;
    }
  }
  return nullptr;
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy:
      return "easy";
    case Difficulty::Medium:
      return "medium";
    case Difficulty::Hard:
      return "hard";
  }
  return "easy";
}

std::string_view to_string(QuestionType q) {
  switch (q) {
    case QuestionType::Attribute:
      return "attribute";
    case QuestionType::Counting:
      return "counting";
    case QuestionType::Location:
      return "location";
    case QuestionType::Relationship:
      return "relationship";
    case QuestionType::State:
      return "state";
  }
  return "attribute";
}

std::string_view to_string(AnswerFormat f) {
  return f == AnswerFormat::Choice ? "choice" : "open";
}

std::optional<Difficulty> parse_difficulty(std::string_view s) {
  for (auto d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}) {
    if (to_string(d) == s) {
      return d;
    }
  }
  return std::nullopt;
}

std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (auto q : {QuestionType::Attribute, QuestionType::Counting, QuestionType::Location,
                 QuestionType::Relationship, QuestionType::State}) {
    if (to_string(q) == s) {
      return q;
    }
  }
  return std::nullopt;
}

std::optional<AnswerFormat> parse_answer_format(std::string_view s) {
  if (s == "choice") {
    return AnswerFormat::Choice;
  }
  if (s == "open" || s == "open_ended") {
    return AnswerFormat::OpenEnded;
  }
  return std::nullopt;
}

void validate_task(const Task& task) {
  if (task.subtasks.size() < 2) {
    throw InvariantError("task '" + task.id + "': subtasks must contain at least 2 goals");
  }
  std::set<std::string> goal_tags;
  for (const auto& st : task.subtasks) {
    goal_tags.insert(st.goal_tag);
  }
  for (std::size_t i = 0; i < task.questions.size(); ++i) {
    const auto& qa = task.questions[i];
    const std::string name = "task '" + task.id + "': questions[" + std::to_string(i) + "]";
    if (goal_tags.count(qa.goal_tag) == 0) {
      throw InvariantError(name + ".goal_tag '" + qa.goal_tag + "' is not a subtask goal");
    }
    if (qa.format == AnswerFormat::Choice) {
      if (qa.choices.size() < 2 || qa.choices.size() > 5) {
        throw InvariantError(name + ".choices must hold 2-5 entries");
      }
      if (std::count(qa.choices.begin(), qa.choices.end(), qa.answer) != 1) {
        throw InvariantError(name + ".choices must contain the answer exactly once");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json parse_json_text(std::string_view text, std::string_view what) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw ParseError(std::string(what) + ": not valid JSON");
  }
  if (!doc.is_object()) {
    throw ParseError(std::string(what) + ": top level must be an object");
  }
  return doc;
}

}  // namespace

Scene parse_scene(std::string_view json_text) {
  const json doc = parse_json_text(json_text, "scene");
  const double cell_size = json_io::number(doc, "cell_size", "scene", 0.1);
  const int width = json_io::integer(doc, "width", "scene");
  const int height = json_io::integer(doc, "height", "scene");
  if (width <= 0 || height <= 0 || static_cast<long long>(width) * height > 100'000'000LL) {
    throw InvariantError("scene: width/height out of range");
  }
  std::vector<CellState> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                               CellState::Free);
  if (doc.contains("occupied")) {
    const auto& occ = doc.at("occupied");
    if (!occ.is_array()) {
      throw ParseError("scene.occupied: expected an array of [row, col]");
    }
    for (std::size_t i = 0; i < occ.size(); ++i) {
      const auto& rc = occ[i];
      if (!rc.is_array() || rc.size() != 2 || !rc[0].is_number_integer() ||
          !rc[1].is_number_integer()) {
        throw ParseError("scene.occupied[" + std::to_string(i) + "]: expected [row, col]");
      }
      const Cell c{rc[0].get<int>(), rc[1].get<int>()};
      if (c.row < 0 || c.row >= height || c.col < 0 || c.col >= width) {
        throw InvariantError("scene.occupied[" + std::to_string(i) + "]: cell out of bounds");
      }
      cells[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(c.col)] = CellState::Occupied;
    }
  }
  std::vector<SceneObject> objects;
  if (doc.contains("objects")) {
    const auto& objs = doc.at("objects");
    if (!objs.is_array()) {
      throw ParseError("scene.objects: expected an array");
    }
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const std::string where = "scene.objects[" + std::to_string(i) + "]";
      const auto& o = objs[i];
      if (!o.is_object()) {
        throw ParseError(where + ": expected an object");
      }
      SceneObject obj;
      obj.tag = json_io::string(o, "tag", where);
      obj.pose.x = json_io::number(o, "x", where);
      obj.pose.y = json_io::number(o, "y", where);
      obj.region = json_io::string(o, "region", where, "");
      obj.color = json_io::string(o, "color", where, "");
      obj.state = json_io::string(o, "state", where, "");
      obj.count = json_io::integer(o, "count", where, 1);
      objects.push_back(std::move(obj));
    }
  }
  return Scene(width, height, cell_size, std::move(cells), std::move(objects));
}

std::string serialize_scene(const Scene& scene) {
  json doc;
  doc["cell_size"] = scene.cell_size();
  doc["width"] = scene.width();
  doc["height"] = scene.height();
  json occ = json::array();
  for (std::size_t i = 0; i < scene.cell_count(); ++i) {
    if (scene.cells()[i] == CellState::Occupied) {
      const Cell c = scene.cell_at(i);
      occ.push_back({c.row, c.col});
    }
  }
  doc["occupied"] = std::move(occ);
  json objs = json::array();
  for (const auto& o : scene.objects()) {
    objs.push_back({{"tag", o.tag},
                    {"x", o.pose.x},
                    {"y", o.pose.y},
                    {"region", o.region},
                    {"color", o.color},
                    {"state", o.state},
                    {"count", o.count}});
  }
  doc["objects"] = std::move(objs);
  return doc.dump() + "\n";
}

Scene load_scene(const std::filesystem::path& path) { return parse_scene(json_io::read_text(path)); }

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  json_io::write_atomically(path, serialize_scene(scene));
}

Task parse_task(std::string_view json_text) {
  const json doc = parse_json_text(json_text, "task");
  Task task;
  task.id = json_io::string(doc, "id", "task");
  task.instruction = json_io::string(doc, "instruction", "task", "");
  if (doc.contains("start")) {
    task.start = json_io::pose(doc.at("start"), "task.start");
  }
  if (doc.contains("difficulty")) {
    const auto d = parse_difficulty(json_io::string(doc, "difficulty", "task"));
    if (!d) {
      throw ParseError("task.difficulty: expected easy|medium|hard");
    }
    task.difficulty = *d;
  }
  const auto& subtasks = doc.contains("subtasks") ? doc.at("subtasks") : json::array();
  if (!subtasks.is_array()) {
    throw ParseError("task.subtasks: expected an array");
  }
  for (std::size_t i = 0; i < subtasks.size(); ++i) {
    const std::string where = "task.subtasks[" + std::to_string(i) + "]";
    const auto& s = subtasks[i];
    Subtask st;
    st.goal_tag = json_io::string(s, "goal_tag", where);
    st.goal_pose.x = json_io::number(s, "x", where);
    st.goal_pose.y = json_io::number(s, "y", where);
    st.descriptor = json_io::string(s, "descriptor", where, "");
    task.subtasks.push_back(std::move(st));
  }
  if (doc.contains("questions")) {
    const auto& qs = doc.at("questions");
    if (!qs.is_array()) {
      throw ParseError("task.questions: expected an array");
    }
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const std::string where = "task.questions[" + std::to_string(i) + "]";
      const auto& q = qs[i];
      QAItem qa;
      qa.question = json_io::string(q, "question", where);
      const auto qtype = parse_question_type(json_io::string(q, "qtype", where));
      if (!qtype) {
        throw ParseError(where + ".qtype: unknown question type");
      }
      qa.qtype = *qtype;
      const auto fmt = parse_answer_format(json_io::string(q, "format", where));
      if (!fmt) {
        throw ParseError(where + ".format: expected choice|open");
      }
      qa.format = *fmt;
      if (q.contains("choices")) {
        qa.choices = json_io::string_list(q.at("choices"), where + ".choices");
      }
      qa.answer = json_io::string(q, "answer", where);
      qa.goal_tag = json_io::string(q, "goal_tag", where, "");
      task.questions.push_back(std::move(qa));
    }
  }
  validate_task(task);
  return task;
}

std::string serialize_task(const Task& task) {
  json doc;
  doc["id"] = task.id;
  doc["instruction"] = task.instruction;
  doc["start"] = json_io::to_json(task.start);
  doc["difficulty"] = std::string(to_string(task.difficulty));
  json subtasks = json::array();
  for (const auto& st : task.subtasks) {
    subtasks.push_back({{"goal_tag", st.goal_tag},
                        {"x", st.goal_pose.x},
                        {"y", st.goal_pose.y},
                        {"descriptor", st.descriptor}});
  }
  doc["subtasks"] = std::move(subtasks);
  json qs = json::array();
  for (const auto& qa : task.questions) {
    json q = {{"question", qa.question},
              {"qtype", std::string(to_string(qa.qtype))},
              {"format", std::string(to_string(qa.format))},
              {"answer", qa.answer},
              {"goal_tag", qa.goal_tag}};
    if (qa.format == AnswerFormat::Choice) {
      q["choices"] = qa.choices;
    }
    qs.push_back(std::move(q));
  }
  doc["questions"] = std::move(qs);
  return doc.dump(2) + "\n";
}

Task load_task(const std::filesystem::path& path) { return parse_task(json_io::read_text(path)); }

void save_task(const Task& task, const std::filesystem::path& path) {
  json_io::write_atomically(path, serialize_task(task));
}

// ---------------------------------------------------------------------------
// Geodesics

std::vector<double> distance_field(const Scene& scene, const Cell& source) {
  std::vector<double> dist(scene.cell_count(), kUnreachable);
  if (!scene.is_free(source)) {
    return dist;
  }
  const double orth = scene.cell_size();
  const double diag = std::sqrt(2.0) * scene.cell_size();
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::vector<char> done(scene.cell_count(), 0);
  const std::size_t src = scene.index(source);
  dist[src] = 0.0;
  open.emplace(0.0, src);
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (done[idx]) {
      continue;
    }
    done[idx] = 1;
    const Cell c = scene.cell_at(idx);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) {
          continue;
        }
        const Cell n{c.row + dr, c.col + dc};
        if (!scene.is_free(n)) {
          continue;
        }
        const bool diagonal = dr != 0 && dc != 0;
        if (diagonal && (!scene.is_free(Cell{c.row + dr, c.col}) ||
                         !scene.is_free(Cell{c.row, c.col + dc}))) {
          continue;
        }
        const double nd = d + (diagonal ? diag : orth);
        const std::size_t ni = scene.index(n);
        if (!done[ni] && (dist[ni] < 0.0 || nd < dist[ni])) {
          dist[ni] = nd;
          open.emplace(nd, ni);
        }
      }
    }
  }
  return dist;
}

std::optional<double> geodesic_distance(const Scene& scene, const Pose& a, const Pose& b) {
  const Cell ca = cell_of(a.x, a.y, scene.cell_size());
  const Cell cb = cell_of(b.x, b.y, scene.cell_size());
  if (!scene.is_free(ca) || !scene.is_free(cb)) {
    return std::nullopt;
  }
  if (ca == cb) {
    return 0.0;
  }
  const auto field = distance_field(scene, ca);
  const double d = field[scene.index(cb)];
  if (d < 0.0) {
    return std::nullopt;
  }
  return d;
}

Difficulty difficulty_for_distance(double max_distance_m) {
  if (max_distance_m <= 5.0) {
    return Difficulty::Easy;
  }
  if (max_distance_m <= 10.0) {
    return Difficulty::Medium;
  }
  return Difficulty::Hard;
}

Difficulty classify_difficulty(const Scene& scene, const Pose& start, const Task& task) {
  const Cell sc = cell_of(start.x, start.y, scene.cell_size());
  if (!scene.is_free(sc)) {
    throw UnreachableError("classify_difficulty: start pose is not on a Free cell");
  }
  const auto field = distance_field(scene, sc);
  double worst = 0.0;
  for (std::size_t i = 0; i < task.subtasks.size(); ++i) {
    const auto& goal = task.subtasks[i];
    const Cell gc = cell_of(goal.goal_pose.x, goal.goal_pose.y, scene.cell_size());
    const double d = scene.is_free(gc) ? field[scene.index(gc)] : kUnreachable;
    if (d < 0.0) {
      throw UnreachableError("classify_difficulty: goal " + std::to_string(i) + " ('" +
                             goal.goal_tag + "') is unreachable from the start pose");
    }
    worst = std::max(worst, d);
  }
  return difficulty_for_distance(worst);
}

}  // namespace memexplore
