#include <cmath>
#include <random>

#include "doctest.h"
#include "memexplore/episode.hpp"
#include "memexplore/error.hpp"
#include "memexplore/planner.hpp"
#include "memexplore/simulator.hpp"
#include "memexplore/views.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace memexplore;
using memexplore::testing::goal_task;
using memexplore::testing::SceneBuilder;

namespace {

class StopPolicy : public Policy {
 public:
  std::string name() const override { return "stop"; }
  AgentResponse decide(const StepRequest& r) override {
    if (r.type == RequestType::QA) {
      return act_response(std::nullopt, std::nullopt, default_answer(*r.question));
    }
    return act_response(MoveAction::Stop, std::nullopt);
  }
};

Scene open_room() {
  return SceneBuilder(80, 60).border().object("chair", 3.05, 2.05).object("table", 6.05, 4.05, "room", "blue").build();
}

bool legal_transition(const Scene& scene, const Pose& a, MoveAction act, const Pose& b) {
  EpisodeState s;
  s.pose = a;
  apply_step(scene, s, act);
  return s.pose == b;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("forward and turn dynamics") {
    const Scene s = SceneBuilder(40, 40).build();
    EpisodeState st;
    st.pose = Pose{1.05, 1.05, 0.0};
    const auto next = step(s, st, MoveAction::Forward);
    CHECK(next.pose.x == doctest::Approx(1.30).epsilon(1e-12));
    CHECK(next.pose.y == 1.05);
    CHECK(next.step == 1);
    CHECK(next.trajectory.size() == 1);
    const auto left = step(s, st, MoveAction::TurnLeft);
    CHECK(left.pose.heading == 330.0);
    const auto right = step(s, st, MoveAction::TurnRight);
    CHECK(right.pose.heading == 30.0);
  }

  TEST_CASE("forward into a wall keeps the pose and consumes a step") {
    const Scene s = SceneBuilder(40, 40).wall(0, 12, 39, 13).build();
    EpisodeState st;
    st.pose = Pose{1.05, 1.05, 0.0};
    CHECK(forward_blocked(s, st.pose));
    const auto next = step(s, st, MoveAction::Forward);
    CHECK(next.pose == st.pose);
    CHECK(next.step == 1);
    // Oracle: a cell lookup at the destination.
    const Pose dest = advance(st.pose);
    CHECK_FALSE(s.is_free(dest.x, dest.y));
  }

  TEST_CASE("a thin wall between start and destination also blocks") {
    const Scene s = SceneBuilder(40, 40).wall(0, 12, 39, 12).build();
    const Pose p{1.15, 1.05, 0.0};
    const Pose dest = advance(p);
    CHECK(s.is_free(dest.x, dest.y));
    CHECK(forward_blocked(s, p));
  }

  TEST_CASE("leaving the scene is blocked") {
    const Scene s = SceneBuilder(10, 10).build();
    EpisodeState st;
    st.pose = Pose{0.95, 0.5, 0.0};
    CHECK(step(s, st, MoveAction::Forward).pose == st.pose);
  }

  TEST_CASE("stepping a finished subtask is a contract violation") {
    const Scene s = SceneBuilder(10, 10).build();
    EpisodeState st;
    st.pose = Pose{0.5, 0.5, 0.0};
    const auto done = step(s, st, MoveAction::Stop);
    CHECK(done.done);
    CHECK_THROWS_AS(step(s, done, MoveAction::Forward), ContractViolation);
  }

  TEST_CASE("views: dead ahead, behind, and +60 degrees") {
    const Scene s = SceneBuilder(100, 100)
                        .object("ahead", 7.05, 5.05)
                        .object("behind", 3.05, 5.05)
                        .object("right", 5.05 + 2.0 * std::cos(kPi / 3.0), 5.05 + 2.0 * std::sin(kPi / 3.0))
                        .build();
    const Pose p{5.05, 5.05, 0.0};
    const auto views = render_views(s, p);
    CHECK(views[0].relative_heading == -60.0);
    CHECK(views[1].relative_heading == 0.0);
    CHECK(views[2].relative_heading == 60.0);
    REQUIRE(views[1].visible.size() == 1);
    CHECK(views[1].visible[0].tag == "ahead");
    CHECK(views[1].visible[0].distance == doctest::Approx(2.0));
    CHECK(views[0].visible.empty());
    REQUIRE(views[2].visible.size() == 1);
    CHECK(views[2].visible[0].tag == "right");
    CHECK(views[2].visible[0].bearing == doctest::Approx(60.0));
    for (const auto& o : s.objects()) {
      const int expected = oracle::visible_view(s, p, o);
      int got = -1;
      for (int v = 0; v < 3; ++v) {
        for (const auto& x : views[static_cast<std::size_t>(v)].visible) {
          if (x.tag == o.tag) {
            got = v;
          }
        }
      }
      CHECK(got == expected);
    }
  }

  TEST_CASE("views agree with the ray-march oracle on random cluttered scenes") {
    std::mt19937_64 rng(3);
    int compared = 0;
    for (int trial = 0; trial < 20; ++trial) {
      SceneBuilder b(60, 60);
      for (int k = 0; k < 60; ++k) {
        const int r = static_cast<int>(rng() % 60);
        const int c = static_cast<int>(rng() % 60);
        b.wall(r, c, std::min(59, r + 1), std::min(59, c + 1));
      }
      const Scene walls = b.build();
      for (int k = 0; k < 15; ++k) {
        const double x = 0.1 + 5.8 * static_cast<double>(rng() % 10007) / 10007.0;
        const double y = 0.1 + 5.8 * static_cast<double>(rng() % 10009) / 10009.0;
        if (walls.is_free(x, y)) {
          b.object("o" + std::to_string(k), x, y);
        }
      }
      const Scene s = b.build();
      for (int k = 0; k < 10; ++k) {
        const Pose p{0.1 + 5.8 * static_cast<double>(rng() % 1000) / 1000.0,
                     0.1 + 5.8 * static_cast<double>(rng() % 1000) / 1000.0, 30.0 * static_cast<double>(rng() % 12)};
        if (!s.is_free(p.x, p.y)) {
          continue;
        }
        const auto views = render_views(s, p);
        for (const auto& o : s.objects()) {
          int got = -1;
          for (int v = 0; v < 3; ++v) {
            for (const auto& x : views[static_cast<std::size_t>(v)].visible) {
              if (x.tag == o.tag) {
                got = v;
              }
            }
          }
          CHECK(got == oracle::visible_view(s, p, o));
          CHECK((got >= 0) == is_visible(s, p, o));
          ++compared;
        }
      }
    }
    CHECK(compared > 500);
  }

  TEST_CASE("views order objects by distance then tag") {
    const Scene s = SceneBuilder(100, 100).object("b", 7.05, 5.05).object("a", 7.05, 5.05).object("c", 6.05, 5.05).build();
    const auto views = render_views(s, Pose{5.05, 5.05, 0.0});
    REQUIRE(views[1].visible.size() == 3);
    CHECK(views[1].visible[0].tag == "c");
    CHECK(views[1].visible[1].tag == "a");
    CHECK(views[1].visible[2].tag == "b");
  }

  TEST_CASE("success radius is inclusive") {
    const Subtask g{"x", Pose{2.0, 2.0, 0.0}, ""};
    CHECK(check_success(Pose{2.8, 2.0, 0.0}, g));
    CHECK(check_success(Pose{3.0, 2.0, 0.0}, g));
    CHECK_FALSE(check_success(Pose{3.2, 2.0, 0.0}, g));
  }

  TEST_CASE("always-Stop policy fails every subtask in one step") {
    const Scene s = open_room();
    const Task t = goal_task(s, Pose{0.55, 0.55, 0.0}, {"chair", "table"});
    StopPolicy policy;
    const HashingProvider provider;
    const RuleJudge judge;
    const auto log = run_episode(s, t, policy, EngineConfig{}, 1, provider, judge);
    REQUIRE(log.subtasks.size() == 2);
    for (const auto& sub : log.subtasks) {
      CHECK_FALSE(sub.success);
      CHECK(sub.steps == 1);
      CHECK(sub.end_reason == EndReason::Stop);
    }
    CHECK(log.steps.size() == 2);
    CHECK(log.qa.size() == 2);
  }

  TEST_CASE("random policy far from the goals uses the full budget per subtask") {
    const Scene s = SceneBuilder(400, 40).object("far", 30.05, 2.05).object("farther", 35.05, 2.05, "room", "blue").build();
    const Task t = goal_task(s, Pose{0.55, 2.05, 0.0}, {"far", "farther"});
    auto policy = make_policy("random", EngineConfig{});
    const HashingProvider provider;
    const RuleJudge judge;
    const auto log = run_episode(s, t, *policy, EngineConfig{}, 9, provider, judge);
    REQUIRE(log.subtasks.size() == 2);
    for (const auto& sub : log.subtasks) {
      CHECK(sub.steps == 50);
      CHECK(sub.end_reason == EndReason::Budget);
    }
    CHECK(log.steps.size() == 100);
  }

  TEST_CASE("oracle policy reaches goals with shortest-path step counts") {
    const Scene s = open_room();
    const Task t = goal_task(s, Pose{0.55, 0.55, 0.0}, {"chair", "table"});
    auto policy = make_policy("oracle", EngineConfig{});
    const HashingProvider provider;
    const RuleJudge judge;
    const auto log = run_episode(s, t, *policy, EngineConfig{}, 2, provider, judge);
    for (const auto& sub : log.subtasks) {
      CHECK(sub.success);
      const int forwards = static_cast<int>(std::lround(sub.path_length / kForwardStep));
      CHECK(forwards <= static_cast<int>(std::ceil(sub.shortest / kForwardStep)));
      CHECK(sub.path_length <= sub.shortest + 1e-9);
      const Plan plan = plan_to_goal(s, sub.start_pose, t.subtasks[static_cast<std::size_t>(sub.index)]).value();
      CHECK(sub.steps == static_cast<int>(std::max<std::size_t>(plan.size(), 1)));
      CHECK(plan.forwards == forwards);
    }
  }

  TEST_CASE("trajectory continuity, view soundness and determinism") {
    const Scene s = SceneBuilder(80, 60).border().wall(20, 1, 22, 40).object("chair", 3.05, 4.05).object("table", 6.05, 1.05, "room", "blue").build();
    const Task t = goal_task(s, Pose{0.55, 0.55, 0.0}, {"chair", "table"});
    const HashingProvider provider;
    const RuleJudge judge;
    for (const char* name : {"random", "greedy", "oracle"}) {
      auto p1 = make_policy(name, EngineConfig{});
      auto p2 = make_policy(name, EngineConfig{});
      const auto a = run_episode(s, t, *p1, EngineConfig{}, 77, provider, judge);
      const auto b = run_episode(s, t, *p2, EngineConfig{}, 77, provider, judge);
      CHECK(a == b);
      CHECK(log_to_jsonl(a) == log_to_jsonl(b));
      for (std::size_t i = 0; i + 1 < a.steps.size(); ++i) {
        const auto& r = a.steps[i];
        if (r.action != MoveAction::Stop) {
          CHECK(legal_transition(s, r.pose, r.action, a.steps[i + 1].pose));
        }
      }
      for (const auto& r : a.steps) {
        for (int v = 0; v < 3; ++v) {
          for (const auto& x : r.views[static_cast<std::size_t>(v)].visible) {
            CHECK(oracle::visible_view(s, r.pose, *s.find_object(x.tag)) == v);
          }
        }
      }
    }
  }

  TEST_CASE("episode log JSONL round trip") {
    const Scene s = open_room();
    const Task t = goal_task(s, Pose{0.55, 0.55, 0.0}, {"chair", "table"});
    auto policy = make_policy("greedy", EngineConfig{});
    const HashingProvider provider;
    const RuleJudge judge;
    const auto log = run_episode(s, t, *policy, EngineConfig{}, 4, provider, judge);
    const std::string text = log_to_jsonl(log);
    const auto back = log_from_jsonl(text);
    CHECK(back == log);
    CHECK(log_to_jsonl(back) == text);
    CHECK_THROWS_AS(log_from_jsonl("{\"type\":\"step\"}\n"), ParseError);
  }
}
