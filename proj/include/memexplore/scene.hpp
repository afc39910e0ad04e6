#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memexplore/geometry.hpp"

namespace memexplore {

enum class CellState : std::uint8_t { Free, Occupied };

struct SceneObject {
  std::string tag;
  Pose pose;
  std::string region;
  // Attributes a tagging model would report; they feed captions and QA.
  std::string color;
  std::string state;
  int count = 1;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

/// Immutable 2-D occupancy scene. Cell (row, col) covers
/// [col*cell_size, (col+1)*cell_size) x [row*cell_size, (row+1)*cell_size).
class Scene {
 public:
  Scene() = default;
  /// Validates every invariant; throws InvariantError naming the offending field.
  Scene(int width, int height, double cell_size, std::vector<CellState> cells,
        std::vector<SceneObject> objects);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  const std::vector<SceneObject>& objects() const { return objects_; }
  const std::vector<CellState>& cells() const { return cells_; }

  bool in_bounds(const Cell& c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  bool in_bounds(double x, double y) const;
  /// Out-of-bounds cells count as occupied.
  bool is_free(const Cell& c) const {
    return in_bounds(c) && cells_[index(c)] == CellState::Free;
  }
  bool is_free(double x, double y) const { return is_free(cell_of(x, y, cell_size_)); }
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t idx) const {
    return Cell{static_cast<int>(idx / static_cast<std::size_t>(width_)),
                static_cast<int>(idx % static_cast<std::size_t>(width_))};
  }
  std::size_t cell_count() const { return cells_.size(); }
  const SceneObject* find_object(std::string_view tag) const;

  friend bool operator==(const Scene&, const Scene&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.1;
  std::vector<CellState> cells_;
  std::vector<SceneObject> objects_;
};

enum class Difficulty : std::uint8_t { Easy, Medium, Hard };
enum class QuestionType : std::uint8_t { Attribute, Counting, Location, Relationship, State };
enum class AnswerFormat : std::uint8_t { OpenEnded, Choice };

std::string_view to_string(Difficulty d);
std::string_view to_string(QuestionType q);
std::string_view to_string(AnswerFormat f);
std::optional<Difficulty> parse_difficulty(std::string_view s);
std::optional<QuestionType> parse_question_type(std::string_view s);
std::optional<AnswerFormat> parse_answer_format(std::string_view s);

struct QAItem {
  std::string question;
  QuestionType qtype = QuestionType::Attribute;
  AnswerFormat format = AnswerFormat::Choice;
  std::vector<std::string> choices;
  std::string answer;
  std::string goal_tag;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct Subtask {
  std::string goal_tag;
  Pose goal_pose;
  std::string descriptor;

  friend bool operator==(const Subtask&, const Subtask&) = default;
};

struct Task {
  std::string id;
  std::string instruction;
  Pose start;
  std::vector<Subtask> subtasks;
  std::vector<QAItem> questions;
  Difficulty difficulty = Difficulty::Easy;

  friend bool operator==(const Task&, const Task&) = default;
};

/// Throws InvariantError when a task breaks the multi-goal / QA invariants.
void validate_task(const Task& task);

Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(std::string_view json_text);
std::string serialize_scene(const Scene& scene);
void save_scene(const Scene& scene, const std::filesystem::path& path);

Task load_task(const std::filesystem::path& path);
Task parse_task(std::string_view json_text);
std::string serialize_task(const Task& task);
void save_task(const Task& task, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Geodesic distances: 8-connected grid, diagonal cost sqrt(2) * cell_size.
// A diagonal move requires both orthogonally adjacent cells to be free.

inline constexpr double kUnreachable = -1.0;

/// Shortest-path distance in meters from `source` to every cell; kUnreachable
/// for cells with no free path (and for occupied cells).
std::vector<double> distance_field(const Scene& scene, const Cell& source);

/// Geodesic distance between the cells containing a and b, nullopt if none.
std::optional<double> geodesic_distance(const Scene& scene, const Pose& a, const Pose& b);

/// Bands on the maximum start->goal geodesic distance: <=5 m Easy,
/// (5,10] Medium, >10 m Hard. Throws UnreachableError naming the goal.
Difficulty classify_difficulty(const Scene& scene, const Pose& start, const Task& task);
Difficulty difficulty_for_distance(double max_distance_m);

}  // namespace memexplore
