#include "memexplore/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "memexplore/error.hpp"
#include "memexplore/planner.hpp"
#include "memexplore/policy.hpp"
#include "memexplore/simulator.hpp"

namespace memexplore {

namespace {

const std::vector<std::string> kTags = {
    "sofa",          "armchair",      "coffee table",   "television",     "bookshelf",     "floor lamp",
    "dining table",  "refrigerator",  "microwave",      "oven",           "sink",          "dishwasher",
    "washing machine", "dryer",       "bed",            "nightstand",     "wardrobe",      "dresser",
    "mirror",        "desk",          "office chair",   "computer",       "printer",       "toilet",
    "bathtub",       "shower",        "towel rack",     "laundry basket", "plant",         "vase",
    "painting",      "clock",         "piano",          "guitar",         "fireplace",     "rug",
    "cabinet",       "shoe rack",     "umbrella stand", "trash can",      "fan",           "heater",
    "air purifier",  "speaker",       "game console",   "treadmill",      "bicycle",       "toolbox",
    "ladder",        "fish tank",     "bird cage",      "cat bed",        "dog bed",       "teapot",
    "kettle",        "toaster",       "blender",        "cutting board",  "fruit bowl",    "water cooler",
    "filing cabinet", "whiteboard",   "globe",          "telescope",      "sewing machine", "ironing board",
    "coat hanger",   "bench",         "stool",          "piggy bank",
};
const std::vector<std::string> kColors = {"red",  "blue",  "green",  "yellow", "white", "black",
                                          "gray", "brown", "orange", "purple", "pink"};
const std::vector<std::string> kStates = {"open", "closed", "on",     "off",    "clean",
                                          "dirty", "empty", "full", "folded", "broken"};
const std::vector<std::string> kRegions = {"kitchen", "bedroom",   "bathroom", "living room", "office",
                                           "hallway", "dining room", "laundry room", "study", "garage",
                                           "pantry",  "nursery",   "library",  "playroom",    "gym",
                                           "workshop", "attic",    "den",      "foyer",       "storage room"};

constexpr double kCell = 0.1;
constexpr int kWall = 2;          // wall thickness in cells
constexpr int kDoor = 10;         // door width in cells
constexpr int kMinRoom = 35;      // minimum room side in cells
constexpr int kDoorClearance = 4;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  std::uint64_t next() { return g_(); }
  int uniform(int lo, int hi) {  // inclusive
    if (hi <= lo) {
      return lo;
    }
    return lo + static_cast<int>(g_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(g_() % i)]);
    }
  }

 private:
  std::mt19937_64 g_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Rect {
  int r0, c0, r1, c1;  // [r0, r1) x [c0, c1)
  int rows() const { return r1 - r0; }
  int cols() const { return c1 - c0; }
};

bool overlaps(const Rect& a, const Rect& b) {
  return a.r0 < b.r1 && b.r0 < a.r1 && a.c0 < b.c1 && b.c0 < a.c1;
}

class Layout {
 public:
  Layout(int w, int h, Rng& rng) : w_(w), h_(h), cells_(static_cast<std::size_t>(w) * h, CellState::Free), rng_(rng) {
    fill(Rect{0, 0, h, kWall}, CellState::Occupied);
    fill(Rect{0, w - kWall, h, w}, CellState::Occupied);
    fill(Rect{0, 0, kWall, w}, CellState::Occupied);
    fill(Rect{h - kWall, 0, h, w}, CellState::Occupied);
    split(Rect{kWall, kWall, h - kWall, w - kWall}, 0);
  }

  std::vector<CellState>& cells() { return cells_; }
  const std::vector<Rect>& rooms() const { return rooms_; }
  bool free(int r, int c) const {
    return r >= 0 && c >= 0 && r < h_ && c < w_ && cells_[static_cast<std::size_t>(r) * w_ + c] == CellState::Free;
  }
  void fill(const Rect& r, CellState s) {
    for (int row = std::max(0, r.r0); row < std::min(h_, r.r1); ++row) {
      for (int col = std::max(0, r.c0); col < std::min(w_, r.c1); ++col) {
        cells_[static_cast<std::size_t>(row) * w_ + col] = s;
      }
    }
  }
  bool near_door(const Rect& r) const {
    for (const auto& d : doors_) {
      const Rect grown{d.r0 - kDoorClearance, d.c0 - kDoorClearance, d.r1 + kDoorClearance, d.c1 + kDoorClearance};
      if (overlaps(r, grown)) {
        return true;
      }
    }
    return false;
  }

 private:
  void split(const Rect& r, int depth) {
    const double area_m2 = r.rows() * r.cols() * kCell * kCell;
    const bool can_v = r.cols() >= 2 * kMinRoom + kWall;
    const bool can_h = r.rows() >= 2 * kMinRoom + kWall;
    if ((!can_v && !can_h) || depth > 8 || (area_m2 < 45.0 && rng_.unit() < 0.6)) {
      rooms_.push_back(r);
      return;
    }
    const bool vertical = can_v && (!can_h || r.cols() >= r.rows());
    for (int attempt = 0; attempt < 20; ++attempt) {
      if (vertical) {
        const int wc = rng_.uniform(r.c0 + kMinRoom, r.c1 - kMinRoom - kWall);
        const Rect wall{r.r0, wc, r.r1, wc + kWall};
        if (near_door(Rect{wall.r0 - 1, wall.c0, wall.r1 + 1, wall.c1})) {
          continue;
        }
        fill(wall, CellState::Occupied);
        const int dr = rng_.uniform(r.r0 + 2, r.r1 - kDoor - 2);
        const Rect door{dr, wc, dr + kDoor, wc + kWall};
        fill(door, CellState::Free);
        doors_.push_back(door);
        split(Rect{r.r0, r.c0, r.r1, wc}, depth + 1);
        split(Rect{r.r0, wc + kWall, r.r1, r.c1}, depth + 1);
        return;
      }
      const int wr = rng_.uniform(r.r0 + kMinRoom, r.r1 - kMinRoom - kWall);
      const Rect wall{wr, r.c0, wr + kWall, r.c1};
      if (near_door(Rect{wall.r0, wall.c0 - 1, wall.r1, wall.c1 + 1})) {
        continue;
      }
      fill(wall, CellState::Occupied);
      const int dc = rng_.uniform(r.c0 + 2, r.c1 - kDoor - 2);
      const Rect door{wr, dc, wr + kWall, dc + kDoor};
      fill(door, CellState::Free);
      doors_.push_back(door);
      split(Rect{r.r0, r.c0, wr, r.c1}, depth + 1);
      split(Rect{wr + kWall, r.c0, r.r1, r.c1}, depth + 1);
      return;
    }
    rooms_.push_back(r);
  }

  int w_;
  int h_;
  std::vector<CellState> cells_;
  Rng& rng_;
  std::vector<Rect> rooms_;
  std::vector<Rect> doors_;
};

bool clear_around(const Layout& layout, int row, int col, int radius) {
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      if (!layout.free(row + dr, col + dc)) {
        return false;
      }
    }
  }
  return true;
}

std::string region_name(std::size_t i) {
  if (i < kRegions.size()) {
    return kRegions[i];
  }
  return kRegions[i % kRegions.size()] + " " + std::to_string(i / kRegions.size() + 1);
}

}  // namespace

Scene generate_scene(std::uint64_t seed, double size_m) {
  if (!(size_m >= 8.0 && size_m <= 100.0)) {
    throw ContractViolation("invalid size " + std::to_string(size_m) + " m (expected 8..100)");
  }
  Rng rng(mix(seed, 0x5ce7e));
  const int long_side = static_cast<int>(std::lround(size_m / kCell));
  const int short_side = static_cast<int>(std::lround(size_m * (0.7 + 0.3 * rng.unit()) / kCell));
  const bool wide = rng.next() % 2 == 0;
  const int w = wide ? long_side : short_side;
  const int h = wide ? short_side : long_side;
  Layout layout(w, h, rng);

  std::vector<std::size_t> region_order(layout.rooms().size());
  for (std::size_t i = 0; i < region_order.size(); ++i) {
    region_order[i] = i;
  }
  rng.shuffle(region_order);

  // Pillars keep rooms from being empty boxes.
  for (const auto& room : layout.rooms()) {
    const double area = room.rows() * room.cols() * kCell * kCell;
    const int pillars = area > 20.0 ? rng.uniform(0, 2) : 0;
    for (int p = 0; p < pillars; ++p) {
      const int side = rng.uniform(3, 5);
      if (room.rows() < 2 * 12 + side || room.cols() < 2 * 12 + side) {
        break;
      }
      const int r = rng.uniform(room.r0 + 12, room.r1 - 12 - side);
      const int c = rng.uniform(room.c0 + 12, room.c1 - 12 - side);
      const Rect pillar{r, c, r + side, c + side};
      if (!layout.near_door(Rect{pillar.r0 - 8, pillar.c0 - 8, pillar.r1 + 8, pillar.c1 + 8})) {
        layout.fill(pillar, CellState::Occupied);
      }
    }
  }

  std::vector<std::string> tags = kTags;
  rng.shuffle(tags);
  std::size_t next_tag = 0;
  std::vector<SceneObject> objects;
  for (std::size_t ri = 0; ri < layout.rooms().size(); ++ri) {
    const auto& room = layout.rooms()[ri];
    const double area = room.rows() * room.cols() * kCell * kCell;
    const int n = std::max(1, static_cast<int>(std::lround(area / 9.0)));
    for (int k = 0; k < n && next_tag < tags.size(); ++k) {
      for (int attempt = 0; attempt < 40; ++attempt) {
        const int r = rng.uniform(room.r0 + 5, room.r1 - 6);
        const int c = rng.uniform(room.c0 + 5, room.c1 - 6);
        if (!clear_around(layout, r, c, 3)) {
          continue;
        }
        const double x = (c + 0.5) * kCell;
        const double y = (r + 0.5) * kCell;
        const bool crowded = std::any_of(objects.begin(), objects.end(), [&](const SceneObject& o) {
          return euclidean(o.pose.x, o.pose.y, x, y) < 1.2;
        });
        if (crowded) {
          continue;
        }
        SceneObject obj;
        obj.tag = tags[next_tag++];
        obj.pose = Pose{x, y, 0.0};
        obj.region = region_name(region_order[ri]);
        obj.color = kColors[rng.next() % kColors.size()];
        obj.state = kStates[rng.next() % kStates.size()];
        obj.count = rng.uniform(1, 4);
        objects.push_back(std::move(obj));
        break;
      }
    }
  }
  return Scene(w, h, kCell, std::move(layout.cells()), std::move(objects));
}

std::string suite_task_id(std::uint64_t seed, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "s%llu_t%03d", static_cast<unsigned long long>(seed), index);
  return buf;
}

namespace {

std::vector<std::string> with_distractors(Rng& rng, const std::string& answer, std::vector<std::string> pool) {
  pool.erase(std::remove(pool.begin(), pool.end(), answer), pool.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  rng.shuffle(pool);
  std::vector<std::string> choices{answer};
  for (std::size_t i = 0; i < pool.size() && choices.size() < 4; ++i) {
    choices.push_back(pool[i]);
  }
  rng.shuffle(choices);
  return choices;
}

QAItem make_question(Rng& rng, const Scene& scene, const SceneObject& obj, QuestionType qtype, AnswerFormat format) {
  QAItem q;
  q.qtype = qtype;
  q.format = format;
  q.goal_tag = obj.tag;
  std::vector<std::string> pool;
  switch (qtype) {
    case QuestionType::Attribute:
      q.question = "What color is the " + obj.tag + "?";
      q.answer = obj.color;
      pool = kColors;
      break;
    case QuestionType::State:
      q.question = "What state is the " + obj.tag + " in?";
      q.answer = obj.state;
      pool = kStates;
      break;
    case QuestionType::Counting:
      q.question = "How many " + obj.tag + " items are there?";
      q.answer = std::to_string(obj.count);
      pool = {"1", "2", "3", "4", "5"};
      break;
    case QuestionType::Location:
      q.question = "Which room is the " + obj.tag + " in?";
      q.answer = obj.region;
      for (const auto& o : scene.objects()) {
        pool.push_back(o.region);
      }
      if (pool.size() < 4) {
        pool.insert(pool.end(), kRegions.begin(), kRegions.end());
      }
      break;
    case QuestionType::Relationship: {
      q.question = "Which object is closest to the " + obj.tag + "?";
      const SceneObject* nearest = nullptr;
      double best = 1e300;
      for (const auto& o : scene.objects()) {
        if (o.tag == obj.tag) {
          continue;
        }
        const double d = euclidean(o.pose.x, o.pose.y, obj.pose.x, obj.pose.y);
        if (d < best) {
          best = d;
          nearest = &o;
        }
        pool.push_back(o.tag);
      }
      q.answer = nearest != nullptr ? nearest->tag : obj.tag;
      break;
    }
  }
  if (format == AnswerFormat::Choice) {
    q.choices = with_distractors(rng, q.answer, pool);
  }
  return q;
}

bool oracle_feasible(const Scene& scene, const Task& task, int budget) {
  Pose pose = task.start;
  for (const auto& goal : task.subtasks) {
    PlanConfig pc;
    pc.max_actions = budget;
    const auto plan = plan_to_goal(scene, pose, goal, pc);
    if (!plan) {
      if (!check_success(pose, goal)) {
        return false;
      }
      continue;
    }
    if (static_cast<int>(std::max<std::size_t>(plan->size(), 1)) > budget) {
      return false;
    }
    pose = plan->poses.back();
  }
  return true;
}

}  // namespace

GeneratedTask generate_task(std::uint64_t seed, int index, const GeneratorConfig& cfg) {
  if (index < 0) {
    throw ContractViolation("generate_task: index must be >= 0");
  }
  if (cfg.min_goals < 2 || cfg.max_goals < cfg.min_goals) {
    throw ContractViolation("generate_task: goal range must satisfy 2 <= min <= max");
  }
  const std::uint64_t task_seed = mix(seed, static_cast<std::uint64_t>(index) + 1);
  Scene scene = generate_scene(task_seed, cfg.size_m);
  Rng rng(mix(task_seed, 0x7a5c));

  std::vector<Cell> starts;
  for (int r = 0; r < scene.height(); ++r) {
    for (int c = 0; c < scene.width(); ++c) {
      bool clear = true;
      for (int dr = -3; dr <= 3 && clear; ++dr) {
        for (int dc = -3; dc <= 3 && clear; ++dc) {
          clear = scene.is_free(Cell{r + dr, c + dc});
        }
      }
      if (clear) {
        starts.push_back(Cell{r, c});
      }
    }
  }
  if (starts.empty() || scene.objects().size() < 2) {
    throw Error("generate_task: scene has no room for a task");
  }

  const int target = index % 3;
  for (int shift = 0; shift < 3; ++shift) {
    const auto band = static_cast<Difficulty>((target + shift) % 3);
    const double lo = band == Difficulty::Easy ? 0.0 : band == Difficulty::Medium ? 5.0 : 10.0;
    const double hi = band == Difficulty::Easy ? 5.0 : band == Difficulty::Medium ? 10.0 : 1e300;
    for (int attempt = 0; attempt < cfg.attempts; ++attempt) {
      const Cell sc = starts[rng.next() % starts.size()];
      Pose start{(sc.col + 0.5) * scene.cell_size(), (sc.row + 0.5) * scene.cell_size(),
                 kTurnStep * rng.uniform(0, 11)};
      const auto field = distance_field(scene, sc);
      std::vector<std::pair<double, std::size_t>> pool;
      std::vector<std::size_t> anchors;
      for (std::size_t i = 0; i < scene.objects().size(); ++i) {
        const auto& o = scene.objects()[i];
        const double d = field[scene.index(cell_of(o.pose.x, o.pose.y, scene.cell_size()))];
        if (d < 0.0 || euclidean(o.pose.x, o.pose.y, start.x, start.y) <= 1.5 || d > hi) {
          continue;
        }
        pool.emplace_back(d, i);
        if (d > lo) {
          anchors.push_back(i);
        }
      }
      if (anchors.empty() || pool.size() < static_cast<std::size_t>(cfg.min_goals)) {
        continue;
      }
      const int k = std::min<int>(rng.uniform(cfg.min_goals, cfg.max_goals), static_cast<int>(pool.size()));
      std::vector<std::size_t> chosen{anchors[rng.next() % anchors.size()]};
      std::vector<std::size_t> rest;
      for (const auto& [d, i] : pool) {
        if (i != chosen.front()) {
          rest.push_back(i);
        }
      }
      rng.shuffle(rest);
      for (std::size_t i = 0; i < rest.size() && static_cast<int>(chosen.size()) < k; ++i) {
        chosen.push_back(rest[i]);
      }

      // Nearest-neighbor chain from the start.
      std::vector<std::size_t> order;
      double cx = start.x;
      double cy = start.y;
      while (!chosen.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < chosen.size(); ++i) {
          const auto& a = scene.objects()[chosen[i]].pose;
          const auto& b = scene.objects()[chosen[best]].pose;
          if (euclidean(cx, cy, a.x, a.y) < euclidean(cx, cy, b.x, b.y)) {
            best = i;
          }
        }
        order.push_back(chosen[best]);
        cx = scene.objects()[chosen[best]].pose.x;
        cy = scene.objects()[chosen[best]].pose.y;
        chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(best));
      }

      Task task;
      task.id = suite_task_id(seed, index);
      task.start = start;
      std::string instruction = "Find ";
      for (std::size_t j = 0; j < order.size(); ++j) {
        const auto& o = scene.objects()[order[j]];
        Subtask st;
        st.goal_tag = o.tag;
        st.goal_pose = Pose{o.pose.x, o.pose.y, 0.0};
        st.descriptor = "the " + o.color + " " + o.tag + " in the " + o.region;
        instruction += (j == 0 ? "" : j + 1 == order.size() ? ", and finally " : ", then ") + st.descriptor;
        task.subtasks.push_back(std::move(st));
      }
      task.instruction = instruction + ". Afterwards, answer questions about what you saw.";
      task.difficulty = classify_difficulty(scene, start, task);
      if (task.difficulty != band) {
        continue;
      }
      if (!oracle_feasible(scene, task, cfg.budget_per_subtask)) {
        continue;
      }
      for (std::size_t j = 0; j < order.size(); ++j) {
        const auto qtype = static_cast<QuestionType>((static_cast<std::size_t>(index) + j) % 5);
        const auto format = j % 4 == 3 ? AnswerFormat::OpenEnded : AnswerFormat::Choice;
        task.questions.push_back(make_question(rng, scene, scene.objects()[order[j]], qtype, format));
      }
      validate_task(task);
      return GeneratedTask{std::move(scene), std::move(task)};
    }
  }
  throw Error("generate_task: no feasible task found for index " + std::to_string(index));
}

std::vector<std::string> generate_suite(std::uint64_t seed, int count, const GeneratorConfig& cfg,
                                        const std::filesystem::path& out_dir) {
  if (count < 1) {
    throw ContractViolation("generate_suite: count must be >= 1");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    const auto g = generate_task(seed, i, cfg);
    save_scene(g.scene, out_dir / (g.task.id + ".scene.json"));
    save_task(g.task, out_dir / (g.task.id + ".task.json"));
    ids.push_back(g.task.id);
  }
  return ids;
}

std::vector<SuiteEntry> list_suite(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("suite directory '" + dir.string() + "' does not exist");
  }
  std::vector<SuiteEntry> out;
  const std::string suffix = ".task.json";
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string id = name.substr(0, name.size() - suffix.size());
    const auto scene = dir / (id + ".scene.json");
    if (!std::filesystem::exists(scene)) {
      throw ParseError("task '" + name + "' has no matching scene file '" + scene.filename().string() + "'");
    }
    out.push_back(SuiteEntry{id, scene, e.path()});
  }
  std::sort(out.begin(), out.end(), [](const SuiteEntry& a, const SuiteEntry& b) { return a.id < b.id; });
  return out;
}

}  // namespace memexplore
