#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memexplore/embedding.hpp"
#include "memexplore/geometry.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

/// One stored observation. `index` is assigned by the bank on insertion and
/// is -1 for an observation that has not been stored.
struct MemoryEntry {
  int index = -1;
  int step = 0;
  Pose pose;
  std::string caption;
  std::vector<std::string> tags;  // distinct visible tags, sorted
  std::vector<double> text_feature;
  std::vector<double> obs_feature;
  bool goal_related = false;

  friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

/// "<color> <tag> (<state>, x<count>) in <region> at <d> m bearing <b>"
/// per visible object, joined with "; ". Empty views give "nothing in view".
std::string caption_for(const ViewTriplet& views);

/// Tokens that describe what is seen rather than how it is phrased: tag,
/// color, color_tag and v<view>_<tag> per visible object.
std::vector<std::string> visual_tokens(const ViewTriplet& views);

/// Builds the unstored entry for the current observation.
MemoryEntry observe(const Pose& pose, const ViewTriplet& views, int step,
                    const EmbeddingProvider& provider);

struct SimilarityWeights {
  double text = 0.3;
  double obs = 0.5;
  double pos = 0.2;
  double lambda_m = 5.0;
};

/// w.text * <f_a, f_b> + w.obs * <o_a, o_b> + w.pos * exp(-|p_a - p_b| / lambda).
/// Throws ContractViolation on feature dimension mismatch or lambda <= 0.
double similarity(const MemoryEntry& a, const MemoryEntry& b, const SimilarityWeights& w = {});

enum class InsertOutcome { Inserted, SkippedInterval, RejectedRedundant };
std::string_view to_string(InsertOutcome outcome);

struct NoveltyConfig {
  int interval = 10;  // minimum steps between regular insertions
  int window = 10;    // number of most recent entries compared against
  SimilarityWeights weights;
};

class MemoryBank {
 public:
  explicit MemoryBank(NoveltyConfig cfg = {}) : cfg_(cfg) {}

  /// Inserts when at least `interval` steps passed since the last regular
  /// insertion and either the bank holds fewer than `window` entries or the
  /// best similarity against the window is below mean + population std.
  InsertOutcome maybe_insert(MemoryEntry current);
  /// Unconditional insertion flagged goal_related; returns the new index.
  int force_goal_memory(MemoryEntry current);

  const std::vector<MemoryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const NoveltyConfig& config() const { return cfg_; }
  std::optional<int> last_insert_step() const { return last_insert_step_; }

  /// Bank restricted to its first `n` entries (state as of that insertion).
  MemoryBank prefix(std::size_t n) const;

  std::string to_jsonl() const;
  static MemoryBank from_jsonl(std::string_view text, NoveltyConfig cfg = {});
  void save(const std::filesystem::path& path) const;
  static MemoryBank load(const std::filesystem::path& path, NoveltyConfig cfg = {});

  friend bool operator==(const MemoryBank& a, const MemoryBank& b) {
    return a.entries_ == b.entries_ && a.last_insert_step_ == b.last_insert_step_;
  }

 private:
  int append(MemoryEntry entry);

  NoveltyConfig cfg_;
  std::vector<MemoryEntry> entries_;
  std::optional<int> last_insert_step_;
};

}  // namespace memexplore
