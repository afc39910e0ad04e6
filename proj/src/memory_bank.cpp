#include "memexplore/memory_bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

namespace {

std::string or_none(const std::string& s) { return s.empty() ? "none" : s; }

std::string describe(const VisibleObject& obj) {
  char numbers[96];
  std::snprintf(numbers, sizeof(numbers), "x%d) in ", obj.count);
  std::string out = or_none(obj.color) + " " + obj.tag + " (" + or_none(obj.state) + ", " + numbers +
                    or_none(obj.region);
  std::snprintf(numbers, sizeof(numbers), " at %.1f m bearing %+.0f", obj.distance, obj.bearing);
  return out + numbers;
}

}  // namespace

std::string caption_for(const ViewTriplet& views) {
  std::string out;
  for (const auto& view : views) {
    for (const auto& obj : view.visible) {
      if (!out.empty()) {
        out += "; ";
      }
      out += describe(obj);
    }
  }
  return out.empty() ? "nothing in view" : out;
}

std::vector<std::string> visual_tokens(const ViewTriplet& views) {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (const auto& obj : views[v].visible) {
      out.push_back(obj.tag);
      if (!obj.color.empty()) {
        out.push_back(obj.color);
        out.push_back(obj.color + "_" + obj.tag);
      }
      out.push_back("v" + std::to_string(v) + "_" + obj.tag);
    }
  }
  return out;
}

MemoryEntry observe(const Pose& pose, const ViewTriplet& views, int step,
                    const EmbeddingProvider& provider) {
  MemoryEntry e;
  e.step = step;
  e.pose = pose;
  e.caption = caption_for(views);
  std::set<std::string> tags;
  for (const auto& view : views) {
    for (const auto& obj : view.visible) {
      tags.insert(obj.tag);
    }
  }
  e.tags.assign(tags.begin(), tags.end());
  e.text_feature = provider.text(e.caption);
  e.obs_feature = provider.observation(e.caption, visual_tokens(views));
  return e;
}

double similarity(const MemoryEntry& a, const MemoryEntry& b, const SimilarityWeights& w) {
  if (a.text_feature.size() != b.text_feature.size() || a.obs_feature.size() != b.obs_feature.size()) {
    throw ContractViolation("similarity: feature dimension mismatch");
  }
  if (!(w.lambda_m > 0.0)) {
    throw ContractViolation("similarity: lambda must be positive");
  }
  const double d = euclidean(a.pose.x, a.pose.y, b.pose.x, b.pose.y);
  return w.text * dot(a.text_feature, b.text_feature) + w.obs * dot(a.obs_feature, b.obs_feature) +
         w.pos * std::exp(-d / w.lambda_m);
}

std::string_view to_string(InsertOutcome outcome) {
  switch (outcome) {
    case InsertOutcome::Inserted:
      return "inserted";
    case InsertOutcome::SkippedInterval:
      return "skipped_interval";
    case InsertOutcome::RejectedRedundant:
      return "rejected_redundant";
  }
  return "?";
}

int MemoryBank::append(MemoryEntry entry) {
  if (!entries_.empty()) {
    const auto& last = entries_.back();
    if (entry.step < last.step) {
      throw ContractViolation("memory bank: step " + std::to_string(entry.step) +
                              " precedes last stored step " + std::to_string(last.step));
    }
    if (entry.text_feature.size() != last.text_feature.size() ||
        entry.obs_feature.size() != last.obs_feature.size()) {
      throw ContractViolation("memory bank: feature dimension mismatch");
    }
  }
  entry.index = static_cast<int>(entries_.size());
  entries_.push_back(std::move(entry));
  return entries_.back().index;
}

InsertOutcome MemoryBank::maybe_insert(MemoryEntry current) {
  if (cfg_.interval < 0 || cfg_.window < 1) {
    throw ContractViolation("memory bank: interval must be >= 0 and window >= 1");
  }
  if (last_insert_step_ && current.step - *last_insert_step_ < cfg_.interval) {
    return InsertOutcome::SkippedInterval;
  }
  const auto k = static_cast<std::size_t>(cfg_.window);
  bool insert = entries_.size() < k;
  if (!insert) {
    std::vector<double> sims;
    sims.reserve(k);
    for (std::size_t j = entries_.size() - k; j < entries_.size(); ++j) {
      sims.push_back(similarity(current, entries_[j], cfg_.weights));
    }
    const double best = *std::max_element(sims.begin(), sims.end());
    // best < mean + std  <=>  mean gap to best < std of the gaps, which is
    // exact when all similarities coincide.
    double gap_mean = 0.0;
    for (double s : sims) {
      gap_mean += best - s;
    }
    gap_mean /= static_cast<double>(k);
    double var = 0.0;
    for (double s : sims) {
      const double dev = (best - s) - gap_mean;
      var += dev * dev;
    }
    var /= static_cast<double>(k);
    insert = gap_mean < std::sqrt(var);
  }
  if (!insert) {
    return InsertOutcome::RejectedRedundant;
  }
  current.goal_related = false;
  const int step = current.step;
  append(std::move(current));
  last_insert_step_ = step;
  return InsertOutcome::Inserted;
}

int MemoryBank::force_goal_memory(MemoryEntry current) {
  current.goal_related = true;
  return append(std::move(current));
}

MemoryBank MemoryBank::prefix(std::size_t n) const {
  MemoryBank out(cfg_);
  for (std::size_t i = 0; i < std::min(n, entries_.size()); ++i) {
    out.entries_.push_back(entries_[i]);
    if (!entries_[i].goal_related) {
      out.last_insert_step_ = entries_[i].step;
    }
  }
  return out;
}

std::string MemoryBank::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) {
    json_io::json j;
    j["index"] = e.index;
    j["step"] = e.step;
    j["pose"] = json_io::to_json(e.pose);
    j["caption"] = e.caption;
    j["tags"] = e.tags;
    j["goal_related"] = e.goal_related;
    j["text_feature"] = e.text_feature;
    j["obs_feature"] = e.obs_feature;
    out += j.dump();
    out += '\n';
  }
  return out;
}

MemoryBank MemoryBank::from_jsonl(std::string_view text, NoveltyConfig cfg) {
  MemoryBank bank(cfg);
  std::size_t line_no = 0;
  std::size_t pos = 0;
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
    const std::string where = "memory line " + std::to_string(line_no);
    const auto j = json_io::parse(line, where);
    MemoryEntry e;
    e.index = json_io::integer(j, "index", where);
    e.step = json_io::integer(j, "step", where);
    if (!j.contains("pose")) {
      throw ParseError(where + ": missing 'pose'");
    }
    e.pose = json_io::pose(j["pose"], where + ".pose");
    e.caption = json_io::string(j, "caption", where);
    e.tags = j.contains("tags") ? json_io::string_list(j["tags"], where + ".tags")
                                : std::vector<std::string>{};
    e.goal_related = json_io::boolean(j, "goal_related", where, false);
    if (!j.contains("text_feature") || !j.contains("obs_feature")) {
      throw ParseError(where + ": missing feature vectors");
    }
    e.text_feature = json_io::number_list(j["text_feature"], where + ".text_feature");
    e.obs_feature = json_io::number_list(j["obs_feature"], where + ".obs_feature");
    if (e.index != static_cast<int>(bank.entries_.size())) {
      throw InvariantError(where + ": index " + std::to_string(e.index) + " out of sequence");
    }
    const bool goal = e.goal_related;
    const int step = e.step;
    bank.append(std::move(e));
    if (!goal) {
      bank.last_insert_step_ = step;
    }
  }
  return bank;
}

void MemoryBank::save(const std::filesystem::path& path) const {
  json_io::write_atomically(path, to_jsonl());
}

MemoryBank MemoryBank::load(const std::filesystem::path& path, NoveltyConfig cfg) {
  return from_jsonl(json_io::read_text(path), cfg);
}

}  // namespace memexplore
