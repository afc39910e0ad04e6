#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "memexplore/scene.hpp"

namespace memexplore::testing {

struct SceneBuilder {
  int width = 0;
  int height = 0;
  double cell_size = 0.1;
  std::vector<CellState> cells;
  std::vector<SceneObject> objects;

  SceneBuilder(int w, int h, double cs = 0.1)
      : width(w), height(h), cell_size(cs), cells(static_cast<std::size_t>(w) * h, CellState::Free) {}

  SceneBuilder& wall(int r0, int c0, int r1, int c1) {  // inclusive rectangle
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        cells[static_cast<std::size_t>(r) * width + c] = CellState::Occupied;
      }
    }
    return *this;
  }
  SceneBuilder& border() {
    wall(0, 0, 0, width - 1);
    wall(height - 1, 0, height - 1, width - 1);
    wall(0, 0, height - 1, 0);
    wall(0, width - 1, height - 1, width - 1);
    return *this;
  }
  SceneBuilder& object(const std::string& tag, double x, double y, const std::string& region = "room",
                       const std::string& color = "red", const std::string& state = "clean", int count = 1) {
    objects.push_back(SceneObject{tag, Pose{x, y, 0.0}, region, color, state, count});
    return *this;
  }
  Scene build() const { return Scene(width, height, cell_size, cells, objects); }
};

/// Task visiting `tags` in order with one attribute question per goal.
inline Task goal_task(const Scene& scene, const Pose& start, const std::vector<std::string>& tags) {
  Task t;
  t.id = "t";
  t.instruction = "Find";
  t.start = start;
  for (const auto& tag : tags) {
    t.id += "_" + tag;
    t.instruction += " the " + tag;
    const auto* obj = scene.find_object(tag);
    t.subtasks.push_back(Subtask{tag, obj->pose, "the " + tag});
    QAItem q;
    q.question = "What color is the " + tag + "?";
    q.qtype = QuestionType::Attribute;
    q.format = AnswerFormat::Choice;
    q.choices = {"red", "blue", "green", "white"};
    q.answer = obj->color;
    q.goal_tag = tag;
    t.questions.push_back(q);
  }
  t.difficulty = classify_difficulty(scene, start, t);
  return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("memexplore_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::filesystem::path source_dir() { return std::filesystem::path(MEMEXPLORE_SOURCE_DIR); }

}  // namespace memexplore::testing
