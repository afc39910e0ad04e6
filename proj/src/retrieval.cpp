#include "memexplore/retrieval.hpp"

#include <algorithm>
#include <set>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

std::string_view to_string(Channel c) { return c == Channel::Text ? "text" : "obs"; }

std::optional<CombineMode> parse_combine_mode(std::string_view s) {
  if (s == "max") {
    return CombineMode::Max;
  }
  if (s == "sum") {
    return CombineMode::Sum;
  }
  if (s == "interleave") {
    return CombineMode::Interleave;
  }
  return std::nullopt;
}

std::string_view to_string(ToolFailure f) {
  switch (f) {
    case ToolFailure::NoToolCall:
      return "no_tool_call";
    case ToolFailure::Malformed:
      return "malformed";
    case ToolFailure::EmptyQuery:
      return "empty_query";
    case ToolFailure::EmptyMemory:
      return "empty_memory";
    case ToolFailure::RoundLimit:
      return "round_limit";
  }
  return "?";
}

std::vector<int> RetrievalResult::ids() const {
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back(e.index);
  }
  return out;
}

namespace {

struct Scored {
  double score;
  int index;
};

bool better(const Scored& a, const Scored& b) {
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

std::vector<Scored> top_of(std::vector<Scored> all, std::size_t k) {
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

}  // namespace

RetrievalResult retrieve_vector(const MemoryBank& bank, const std::vector<double>& query_feature,
                                const RetrievalConfig& cfg) {
  if (bank.empty()) {
    throw ContractViolation("retrieve: memory bank is empty");
  }
  if (cfg.topk < 1) {
    throw ContractViolation("retrieve: topk must be >= 1");
  }
  const auto& entries = bank.entries();
  std::vector<Scored> text(entries.size());
  std::vector<Scored> obs(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].text_feature.size() != query_feature.size() ||
        entries[i].obs_feature.size() != query_feature.size()) {
      throw ContractViolation("retrieve: query dimension does not match the bank");
    }
    text[i] = {dot(query_feature, entries[i].text_feature), entries[i].index};
    obs[i] = {dot(query_feature, entries[i].obs_feature), entries[i].index};
  }
  const auto k = static_cast<std::size_t>(cfg.topk);
  const auto top_text = top_of(std::move(text), k);
  const auto top_obs = top_of(std::move(obs), k);

  RetrievalResult out;
  if (cfg.mode == CombineMode::Interleave) {
    std::set<int> seen;
    for (std::size_t i = 0; i < k && out.entries.size() < k; ++i) {
      if (i < top_text.size() && seen.insert(top_text[i].index).second) {
        out.entries.push_back({top_text[i].index, Channel::Text, top_text[i].score});
      }
      if (out.entries.size() < k && i < top_obs.size() && seen.insert(top_obs[i].index).second) {
        out.entries.push_back({top_obs[i].index, Channel::Obs, top_obs[i].score});
      }
    }
    return out;
  }

  std::set<int> ids;
  for (const auto& s : top_text) {
    ids.insert(s.index);
  }
  for (const auto& s : top_obs) {
    ids.insert(s.index);
  }
  std::vector<RetrievedMemory> merged;
  for (int id : ids) {
    const auto& e = entries[static_cast<std::size_t>(id)];
    const double t = dot(query_feature, e.text_feature);
    const double o = dot(query_feature, e.obs_feature);
    const Channel ch = o > t ? Channel::Obs : Channel::Text;
    const double score = cfg.mode == CombineMode::Sum ? t + o : std::max(t, o);
    merged.push_back({id, ch, score});
  }
  std::sort(merged.begin(), merged.end(), [](const RetrievedMemory& a, const RetrievedMemory& b) {
    return a.score > b.score || (a.score == b.score && a.index < b.index);
  });
  if (merged.size() > k) {
    merged.resize(k);
  }
  out.entries = std::move(merged);
  return out;
}

RetrievalResult retrieve(const MemoryBank& bank, std::string_view query, const EmbeddingProvider& provider,
                         const RetrievalConfig& cfg) {
  if (bank.empty()) {
    throw ContractViolation("retrieve: memory bank is empty");
  }
  if (tokenize(query).empty()) {
    throw ContractViolation("retrieve: query is empty");
  }
  return retrieve_vector(bank, provider.query(query), cfg);
}

ToolOutcome handle_tool_call(const MemoryBank& bank, const AgentResponse& response,
                             const EmbeddingProvider& provider, const RetrievalConfig& cfg) {
  ToolOutcome out;
  if (response.tool_call_malformed) {
    out.failure = ToolFailure::Malformed;
  } else if (!response.tool_call) {
    out.failure = ToolFailure::NoToolCall;
  } else if (tokenize(response.tool_call->query).empty()) {
    out.failure = ToolFailure::EmptyQuery;
  } else if (bank.empty()) {
    out.failure = ToolFailure::EmptyMemory;
  } else {
    out.result = retrieve(bank, response.tool_call->query, provider, cfg);
  }
  return out;
}

ToolOutcome RetrievalTool::handle(const AgentResponse& response) {
  if (calls_this_step_ >= 1) {
    ++calls_this_step_;
    ToolOutcome out;
    out.failure = ToolFailure::RoundLimit;
    return out;
  }
  ++calls_this_step_;
  return handle_tool_call(*bank_, response, *provider_, cfg_);
}

nlohmann::json memories_to_json(const MemoryBank& bank, const RetrievalResult& result) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : result.entries) {
    const auto& e = bank.entries().at(static_cast<std::size_t>(r.index));
    arr.push_back({{"index", r.index},
                   {"caption", e.caption},
                   {"pose", json_io::to_json(e.pose)},
                   {"score", r.score},
                   {"channel", std::string(to_string(r.channel))}});
  }
  return nlohmann::json{{"memories", arr}};
}

}  // namespace memexplore
