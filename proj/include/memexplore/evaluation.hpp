#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memexplore/episode.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

struct SubtaskOutcome {
  Difficulty difficulty = Difficulty::Easy;
  bool success = false;
  double path_length = 0.0;  // p
  double shortest = -1.0;    // l; negative means unknown
};

/// S * l / max(p, l); 1 for a success with p = l = 0; 0 for failures or
/// unknown l.
double spl_term(const SubtaskOutcome& o);
/// 100 * mean of spl_term. Throws ContractViolation for an empty list.
double spl(const std::vector<SubtaskOutcome>& outcomes);
/// 100 * successes / count. Throws ContractViolation for an empty list.
double success_rate(const std::vector<SubtaskOutcome>& outcomes);
/// mean(scores) * scale. Throws ContractViolation for an empty list or a
/// score outside 1..5.
double open_score(const std::vector<int>& scores, double scale = 20.0);
/// Sum of values in ascending order, so the result does not depend on the
/// input order.
double ordered_sum(std::vector<double> values);

/// Raw tallies of one report row; every metric is derived from these.
struct ReportRow {
  std::string name;
  int episodes = 0;
  int subtasks = 0;
  int successes = 0;
  double spl_sum = 0.0;
  int choice_total = 0;
  int choice_correct = 0;
  int open_total = 0;
  long long open_score_sum = 0;

  std::optional<double> sr() const;
  std::optional<double> spl() const;
  std::optional<double> acc() const;
  std::optional<double> score(double scale) const;
};

struct BenchReport {
  std::string version;
  std::string policy;
  nlohmann::json config;
  double judge_scale = 20.0;
  std::array<ReportRow, 4> rows;  // easy, medium, hard, total
  std::map<std::string, std::pair<int, int>> qtype_accuracy;  // qtype -> (correct, total) over choice questions
  int episodes = 0;
  int aborted = 0;
};

/// Builds the report from episode logs; rows hold raw tallies and the total
/// row is the sum of the three difficulty rows.
BenchReport build_report(const std::vector<EpisodeLog>& logs, const std::string& policy, const nlohmann::json& config,
                         double judge_scale = 20.0);
/// Sums the difficulty rows into a total row (exactly what build_report uses).
ReportRow total_of(const std::array<ReportRow, 4>& rows);

nlohmann::json report_to_json(const BenchReport& r);
/// Columns: row,SR,SPL,Score,Acc,episodes,subtasks (empty cell = undefined).
std::string report_to_csv(const BenchReport& r);

}  // namespace memexplore
