#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "memexplore/error.hpp"
#include "memexplore/reward.hpp"

using namespace memexplore;

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

// Generated by tests/oracles/reward_table.py with exact rational arithmetic.
const TableRow kTable[] = {
#include "reward_table.inc"
};

RewardBreakdown breakdown(const TableRow& r) {
  RewardBreakdown b;
  b.tool = r.success ? ToolStatus::Success : ToolStatus::FailOrAbsent;
  b.c = r.c;
  b.r_action = r.action;
  b.r_frontier = r.frontier;
  b.r_answer = r.answer;
  b.r_format = r.format;
  return b;
}

GroundTruth gt(MoveAction a, int frontier, const std::string& answer) {
  GroundTruth g;
  g.action = a;
  g.frontier_id = frontier;
  g.answer = answer;
  return g;
}

}  // namespace

TEST_SUITE("reward") {
  TEST_CASE("response grammar") {
    const auto full = parse_response("ACTION: forward FRONTIER: 2 ANSWER: B");
    CHECK(full.action == MoveAction::Forward);
    CHECK(full.frontier_id == 2);
    CHECK(full.answer == "B");
    CHECK(full.segments_present() == 3);
    CHECK_FALSE(full.tool_call.has_value());

    const auto call = parse_response(R"({"tool_call":{"query":"washing machine door"}})");
    REQUIRE(call.tool_call.has_value());
    CHECK(call.tool_call->query == "washing machine door");
    CHECK_FALSE(call.action.has_value());
    CHECK_FALSE(call.frontier_id.has_value());
    CHECK_FALSE(call.answer.has_value());

    const auto partial = parse_response("answer: B action: Forward");
    CHECK(partial.action == MoveAction::Forward);
    CHECK_FALSE(partial.frontier_id.has_value());
    CHECK(partial.segments_present() == 2);
    const auto r = total_reward(partial, gt(MoveAction::Forward, 1, "B"), Pose{}, {}, ToolStatus::Success);
    CHECK(r.r_format == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto unknown = parse_response("ACTION: dance FRONTIER: x");
    CHECK_FALSE(unknown.action.has_value());
    CHECK(unknown.has_action_segment);
    CHECK_FALSE(unknown.frontier_id.has_value());

    for (const char* garbage : {"", "{", "ACTION:", "\x01\xff", R"({"tool_call": 3})", "FRONTIER: 99999999999999999999"}) {
      CHECK_NOTHROW(parse_response(garbage));
    }
    CHECK(parse_response(R"({"tool_call": {"q": 1}})").tool_call_malformed);
    const auto back = parse_response(format_response(MoveAction::TurnLeft, 7, std::string("the red one")));
    CHECK(back.action == MoveAction::TurnLeft);
    CHECK(back.frontier_id == 7);
    CHECK(back.answer == "the red one");
  }

  TEST_CASE("consistency predicate") {
    const Pose p{5.0, 5.0, 0.0};
    const FrontierRef ahead{1, 8.0, 5.0};
    const FrontierRef left{2, 5.0, 4.0};  // steering bearing +90
    const FrontierRef right{3, 5.0, 6.0};
    CHECK(consistency(MoveAction::Forward, ahead, p) == 1.0);
    CHECK(consistency(MoveAction::TurnRight, left, p) == 0.5);
    CHECK(consistency(MoveAction::TurnLeft, left, p) == 1.0);
    CHECK(consistency(MoveAction::TurnRight, right, p) == 1.0);
    CHECK(consistency(MoveAction::Forward, left, p) == 0.5);
    CHECK(consistency(std::nullopt, left, p) == 1.0);
    CHECK(consistency(MoveAction::Forward, std::nullopt, p) == 1.0);
    CHECK(RewardConstants{}.c_inconsistent == 0.5);

    CHECK(consistent_pair(MoveAction::Forward, 45.0));
    CHECK_FALSE(consistent_pair(MoveAction::Forward, 45.5));
    CHECK_FALSE(consistent_pair(MoveAction::TurnLeft, 30.0));
    CHECK(consistent_pair(MoveAction::TurnLeft, 30.5));
    CHECK(consistent_pair(MoveAction::TurnLeft, 180.0));
    CHECK(consistent_pair(MoveAction::TurnRight, -30.0));
    CHECK_FALSE(consistent_pair(MoveAction::TurnRight, -29.5));
    CHECK(consistent_pair(MoveAction::TurnRight, -180.0));
  }

  TEST_CASE("exhaustive 64-case table") {
    REQUIRE(sizeof(kTable) / sizeof(kTable[0]) == 64);
    for (const auto& row : kTable) {
      CHECK(evaluate_total(breakdown(row)) == doctest::Approx(row.total).epsilon(1e-12));
    }
  }

  TEST_CASE("worked totals") {
    const Pose p{5.0, 5.0, 0.0};
    const std::vector<FrontierRef> fs{{1, 8.0, 5.0}, {2, 5.0, 4.0}};
    const auto perfect = total_reward(parse_response("ACTION: forward FRONTIER: 1 ANSWER: B"),
                                      gt(MoveAction::Forward, 1, "B"), p, fs, ToolStatus::Success);
    CHECK(perfect.total == 1.0);
    const auto nothing = total_reward(parse_response("hmm"), gt(MoveAction::Forward, 1, "B"), p, fs,
                                      ToolStatus::FailOrAbsent);
    CHECK(nothing.total == 0.0);
    const auto mixed = total_reward(parse_response("ACTION: forward FRONTIER: 2 ANSWER: B"),
                                    gt(MoveAction::Forward, 1, "B"), p, fs, ToolStatus::FailOrAbsent);
    CHECK(mixed.c == 0.5);
    CHECK(mixed.r_action == 1.0);
    CHECK(mixed.r_frontier == 0.0);
    CHECK(mixed.total == doctest::Approx(0.36).epsilon(1e-12));
  }

  TEST_CASE("open-ended answers use token F1") {
    CHECK(token_f1("the red chair", "red chair") == doctest::Approx(0.8));
    CHECK(token_f1("", "red") == 0.0);
    CHECK(choice_match(" B ", "B"));
    CHECK_FALSE(choice_match("b", "B"));
    GroundTruth g = gt(MoveAction::Forward, 1, "red chair");
    g.format = AnswerFormat::OpenEnded;
    const auto r = total_reward(parse_response("ANSWER: the red chair"), g, Pose{}, {}, ToolStatus::Success);
    CHECK(r.r_answer == doctest::Approx(0.8));
  }

  TEST_CASE("group-relative advantages") {
    const auto a = group_relative_advantages({1, 0, 0, 0, 0});
    REQUIRE(a.size() == 5);
    CHECK(a[0] == doctest::Approx(2.0).epsilon(1e-6));
    for (int i = 1; i < 5; ++i) {
      CHECK(a[static_cast<std::size_t>(i)] == doctest::Approx(-0.5).epsilon(1e-6));
    }
    for (double x : group_relative_advantages({0.3, 0.3, 0.3})) {
      CHECK(x == 0.0);
    }
    const auto b = group_relative_advantages({0.1, 0.7, 0.2, 0.95, 0.0});
    CHECK(std::abs(b[0] + b[1] + b[2] + b[3] + b[4]) < 1e-6);
    CHECK_THROWS_AS(group_relative_advantages({1.0}), ContractViolation);
    CHECK(kKlCoefficient == 0.1);
  }

  TEST_CASE("totals are recomputable, bounded and monotone under random breakdowns") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5000; ++trial) {
      RewardBreakdown b;
      b.r_action = u(rng) < 0.5 ? 0.0 : 1.0;
      b.r_frontier = u(rng) < 0.5 ? 0.0 : 1.0;
      b.r_answer = u(rng);
      b.r_format = static_cast<double>(rng() % 4) / 3.0;
      b.c = u(rng) < 0.5 ? 0.5 : 1.0;
      b.tool = u(rng) < 0.5 ? ToolStatus::Success : ToolStatus::FailOrAbsent;
      const double t = evaluate_total(b);
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
      double* fields[4] = {&b.r_action, &b.r_frontier, &b.r_answer, &b.r_format};
      for (double* f : fields) {
        RewardBreakdown lo = b;
        RewardBreakdown hi = b;
        *(&lo.r_action + (f - &b.r_action)) = 0.0;
        *(&hi.r_action + (f - &b.r_action)) = 1.0;
        CHECK(evaluate_total(lo) <= evaluate_total(hi));
      }
    }
    const Pose p{1.0, 1.0, 90.0};
    const std::vector<FrontierRef> fs{{0, 1.0, 3.0}, {1, 3.0, 1.0}, {2, -1.0, 1.0}};
    const char* actions[] = {"forward", "turn left", "turn right", "stop", "jump"};
    for (int trial = 0; trial < 2000; ++trial) {
      std::ostringstream raw;
      if (rng() % 4 != 0) {
        raw << "ACTION: " << actions[rng() % 5] << " ";
      }
      if (rng() % 4 != 0) {
        raw << "FRONTIER: " << rng() % 4 << " ";
      }
      if (rng() % 4 != 0) {
        raw << "ANSWER: " << (rng() % 2 ? "A" : "B");
      }
      const auto status = rng() % 2 ? ToolStatus::Success : ToolStatus::FailOrAbsent;
      const auto b = total_reward(parse_response(raw.str()), gt(MoveAction::TurnLeft, static_cast<int>(rng() % 3), "A"),
                                  p, fs, status);
      CHECK(b.total == evaluate_total(b));
      CHECK(b.total >= 0.0);
      CHECK(b.total <= 1.0);
    }
  }

  TEST_CASE("batch scorer") {
    const std::string in =
        R"({"id":"a","raw_response":"ACTION: forward FRONTIER: 1 ANSWER: B","gt":{"action":"forward","frontier_id":1,"answer":"B"},"pose":{"x":5,"y":5,"heading":0},"tool_status":"success","frontiers":[{"id":1,"x":8,"y":5}]})"
        "\n\n"
        R"({"raw_response":"ACTION: forward FRONTIER: 2 ANSWER: B","gt":{"action":"forward","frontier_id":1,"answer":"B"},"pose":{"x":5,"y":5,"heading":0},"frontiers":[{"id":2,"x":5,"y":4}]})"
        "\n";
    std::istringstream out(score_rollouts(in));
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(out, line)) {
      rows.push_back(nlohmann::json::parse(line));
    }
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["id"] == "a");
    CHECK(rows[0]["total"].get<double>() == 1.0);
    CHECK(rows[1]["total"].get<double>() == doctest::Approx(0.36).epsilon(1e-12));
    try {
      (void)score_rollouts(in + "{\"raw_response\": 1}\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    const auto k = constants_to_json(RewardConstants{});
    CHECK(k.dump().find("0.4") != std::string::npos);
  }
}
