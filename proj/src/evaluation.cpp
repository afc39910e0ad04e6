#include "memexplore/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include "memexplore/error.hpp"

namespace memexplore {

using nlohmann::json;

double spl_term(const SubtaskOutcome& o) {
  if (!o.success || o.shortest < 0.0) {
    return 0.0;
  }
  const double denom = std::max(o.path_length, o.shortest);
  return denom > 0.0 ? o.shortest / denom : 1.0;
}

double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) {
    s += v;
  }
  return s;
}

double spl(const std::vector<SubtaskOutcome>& outcomes) {
  if (outcomes.empty()) {
    throw ContractViolation("spl: no episodes");
  }
  std::vector<double> terms;
  terms.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    terms.push_back(spl_term(o));
  }
  return 100.0 * ordered_sum(std::move(terms)) / static_cast<double>(outcomes.size());
}

double success_rate(const std::vector<SubtaskOutcome>& outcomes) {
  if (outcomes.empty()) {
    throw ContractViolation("success_rate: no subtask outcomes");
  }
  const auto n = std::count_if(outcomes.begin(), outcomes.end(), [](const SubtaskOutcome& o) { return o.success; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(outcomes.size());
}

double open_score(const std::vector<int>& scores, double scale) {
  if (scores.empty()) {
    throw ContractViolation("open_score: no judged answers");
  }
  long long sum = 0;
  for (int s : scores) {
    if (s < 1 || s > 5) {
      throw ContractViolation("open_score: score " + std::to_string(s) + " outside 1..5");
    }
    sum += s;
  }
  return scale * static_cast<double>(sum) / static_cast<double>(scores.size());
}

std::optional<double> ReportRow::sr() const {
  if (subtasks == 0) {
    return std::nullopt;
  }
  return 100.0 * successes / subtasks;
}

std::optional<double> ReportRow::spl() const {
  if (subtasks == 0) {
    return std::nullopt;
  }
  return 100.0 * spl_sum / subtasks;
}

std::optional<double> ReportRow::acc() const {
  if (choice_total == 0) {
    return std::nullopt;
  }
  return 100.0 * choice_correct / choice_total;
}

std::optional<double> ReportRow::score(double scale) const {
  if (open_total == 0) {
    return std::nullopt;
  }
  return scale * static_cast<double>(open_score_sum) / open_total;
}

ReportRow total_of(const std::array<ReportRow, 4>& rows) {
  ReportRow t;
  t.name = "total";
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = rows[i];
    t.episodes += r.episodes;
    t.subtasks += r.subtasks;
    t.successes += r.successes;
    t.spl_sum += r.spl_sum;
    t.choice_total += r.choice_total;
    t.choice_correct += r.choice_correct;
    t.open_total += r.open_total;
    t.open_score_sum += r.open_score_sum;
  }
  return t;
}

BenchReport build_report(const std::vector<EpisodeLog>& logs, const std::string& policy, const json& config,
                         double judge_scale) {
  BenchReport r;
  r.policy = policy;
  r.config = config;
  r.judge_scale = judge_scale;
  r.rows[0].name = "easy";
  r.rows[1].name = "medium";
  r.rows[2].name = "hard";
  std::array<std::vector<double>, 3> terms;
  for (const auto& log : logs) {
    if (r.version.empty()) {
      r.version = log.version;
    }
    const auto d = static_cast<std::size_t>(log.difficulty);
    auto& row = r.rows[d];
    ++row.episodes;
    ++r.episodes;
    if (log.abort_reason) {
      ++r.aborted;
    }
    for (const auto& s : log.subtasks) {
      ++row.subtasks;
      row.successes += s.success ? 1 : 0;
      terms[d].push_back(spl_term(SubtaskOutcome{log.difficulty, s.success, s.path_length, s.shortest}));
    }
    for (const auto& q : log.qa) {
      if (q.format == AnswerFormat::Choice) {
        ++row.choice_total;
        row.choice_correct += q.correct ? 1 : 0;
        auto& acc = r.qtype_accuracy[std::string(to_string(q.qtype))];
        acc.first += q.correct ? 1 : 0;
        ++acc.second;
      } else {
        ++row.open_total;
        row.open_score_sum += q.judge_score;
      }
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    r.rows[d].spl_sum = ordered_sum(terms[d]);
  }
  r.rows[3] = total_of(r.rows);
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json report_to_json(const BenchReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"name", row.name},
                        {"SR", opt(row.sr())},
                        {"SPL", opt(row.spl())},
                        {"Score", opt(row.score(r.judge_scale))},
                        {"Acc", opt(row.acc())},
                        {"counts",
                         {{"episodes", row.episodes},
                          {"subtasks", row.subtasks},
                          {"successes", row.successes},
                          {"spl_sum", row.spl_sum},
                          {"choice_total", row.choice_total},
                          {"choice_correct", row.choice_correct},
                          {"open_total", row.open_total},
                          {"open_score_sum", row.open_score_sum}}}});
  }
  json qtypes = json::object();
  for (const auto& [name, ct] : r.qtype_accuracy) {
    qtypes[name] = json{{"correct", ct.first},
                        {"total", ct.second},
                        {"Acc", ct.second > 0 ? json(100.0 * ct.first / ct.second) : json(nullptr)}};
  }
  return json{{"version", r.version},
              {"policy", r.policy},
              {"config", r.config},
              {"score_mapping", "mean_judge_times_" + std::to_string(static_cast<int>(r.judge_scale))},
              {"episodes", r.episodes},
              {"aborted", r.aborted},
              {"rows", rows},
              {"qtype_accuracy", qtypes}};
}

std::string report_to_csv(const BenchReport& r) {
  std::string out = "row,SR,SPL,Score,Acc,episodes,subtasks\n";
  auto cell = [](const std::optional<double>& v) {
    if (!v) {
      return std::string();
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    out += row.name + "," + cell(row.sr()) + "," + cell(row.spl()) + "," + cell(row.score(r.judge_scale)) + "," +
           cell(row.acc()) + "," + std::to_string(row.episodes) + "," + std::to_string(row.subtasks) + "\n";
  }
  return out;
}

}  // namespace memexplore
