#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memexplore/embedding.hpp"
#include "memexplore/memory_bank.hpp"
#include "memexplore/response.hpp"

namespace memexplore {

inline constexpr int kDefaultTopK = 3;

enum class Channel { Text, Obs };
std::string_view to_string(Channel c);

/// How the per-channel top-k lists are merged.
///  Max: union ranked by the larger of the two cosine scores (default).
///  Sum: union ranked by text + obs cosine.
///  Interleave: alternate text and obs hits in their channel order, skipping
///  duplicates; scores are the channel scores and need not be monotone.
enum class CombineMode { Max, Sum, Interleave };
std::optional<CombineMode> parse_combine_mode(std::string_view s);

struct RetrievedMemory {
  int index = -1;
  Channel channel = Channel::Text;
  double score = 0.0;

  friend bool operator==(const RetrievedMemory&, const RetrievedMemory&) = default;
};

struct RetrievalResult {
  std::vector<RetrievedMemory> entries;

  std::vector<int> ids() const;
  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

struct RetrievalConfig {
  int topk = kDefaultTopK;
  CombineMode mode = CombineMode::Max;
};

/// Pure cosine scoring of the query against both feature channels. Ties
/// break toward the lower entry index. Throws ContractViolation on an empty
/// bank (EmptyMemory), an empty query or topk < 1.
RetrievalResult retrieve(const MemoryBank& bank, std::string_view query, const EmbeddingProvider& provider,
                         const RetrievalConfig& cfg = {});
/// Same, with an already encoded query vector.
RetrievalResult retrieve_vector(const MemoryBank& bank, const std::vector<double>& query_feature,
                                const RetrievalConfig& cfg = {});

enum class ToolFailure { NoToolCall, Malformed, EmptyQuery, EmptyMemory, RoundLimit };
std::string_view to_string(ToolFailure f);

struct ToolOutcome {
  std::optional<RetrievalResult> result;
  std::optional<ToolFailure> failure;

  bool ok() const { return result.has_value(); }
};

/// The retrieval tool as seen by an agent. Allows one call per decision
/// step; begin_step() re-arms it.
class RetrievalTool {
 public:
  RetrievalTool(const MemoryBank& bank, const EmbeddingProvider& provider, RetrievalConfig cfg = {})
      : bank_(&bank), provider_(&provider), cfg_(cfg) {}

  void begin_step() { calls_this_step_ = 0; }
  ToolOutcome handle(const AgentResponse& response);
  int calls_this_step() const { return calls_this_step_; }

 private:
  const MemoryBank* bank_;
  const EmbeddingProvider* provider_;
  RetrievalConfig cfg_;
  int calls_this_step_ = 0;
};

/// Stateless single call: the first-call path of RetrievalTool::handle.
ToolOutcome handle_tool_call(const MemoryBank& bank, const AgentResponse& response,
                             const EmbeddingProvider& provider, const RetrievalConfig& cfg = {});

/// {"memories": [{index, caption, pose, score, channel}]}
nlohmann::json memories_to_json(const MemoryBank& bank, const RetrievalResult& result);

}  // namespace memexplore
