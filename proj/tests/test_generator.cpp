#include <filesystem>
#include <set>

#include "doctest.h"
#include "memexplore/error.hpp"
#include "memexplore/generator.hpp"
#include "test_util.hpp"

using namespace memexplore;

TEST_SUITE("generator") {
  TEST_CASE("scenes and tasks are deterministic in the seed") {
    CHECK(generate_scene(7, 16.0) == generate_scene(7, 16.0));
    CHECK_FALSE(generate_scene(7, 16.0) == generate_scene(8, 16.0));
    const auto a = generate_task(7, 1);
    const auto b = generate_task(7, 1);
    CHECK(a.scene == b.scene);
    CHECK(a.task == b.task);
    CHECK(serialize_task(a.task) == serialize_task(b.task));
    CHECK(suite_task_id(0, 3) == "s0_t003");
    CHECK_THROWS_AS(generate_scene(1, 4.0), ContractViolation);
  }

  TEST_CASE("generated tasks satisfy the task invariants") {
    const GeneratorConfig cfg;
    std::set<Difficulty> bands;
    for (int i = 0; i < 3; ++i) {
      const auto g = generate_task(0, i, cfg);
      CHECK_NOTHROW(validate_task(g.task));
      const int goals = static_cast<int>(g.task.subtasks.size());
      CHECK(goals >= cfg.min_goals);
      CHECK(goals <= cfg.max_goals);
      CHECK(g.task.questions.size() == g.task.subtasks.size());
      CHECK(g.scene.is_free(g.task.start.x, g.task.start.y));
      std::set<std::string> tags;
      for (const auto& o : g.scene.objects()) {
        CHECK(tags.insert(o.tag).second);
      }
      for (const auto& s : g.task.subtasks) {
        CHECK(geodesic_distance(g.scene, g.task.start, s.goal_pose).has_value());
      }
      CHECK(classify_difficulty(g.scene, g.task.start, g.task) == g.task.difficulty);
      bands.insert(g.task.difficulty);
    }
    CHECK(bands.size() == 3);
  }

  TEST_CASE("the committed suite matches a fresh generation") {
    const auto dir = memexplore::testing::source_dir() / "data" / "suite_seed0";
    const auto suite = list_suite(dir);
    REQUIRE(suite.size() == 20);
    std::set<Difficulty> bands;
    for (std::size_t i = 0; i < suite.size(); i += 3) {
      const auto g = generate_task(0, static_cast<int>(i));
      CHECK(load_scene(suite[i].scene_path) == g.scene);
      CHECK(load_task(suite[i].task_path) == g.task);
    }
    for (const auto& e : suite) {
      bands.insert(load_task(e.task_path).difficulty);
    }
    CHECK(bands.size() == 3);
  }
}
