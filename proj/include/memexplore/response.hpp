#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "memexplore/geometry.hpp"

namespace memexplore {

struct ToolCall {
  std::string query;

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

/// A policy output as recovered from its raw text.
struct AgentResponse {
  std::string raw;
  std::optional<ToolCall> tool_call;
  bool tool_call_malformed = false;  // a tool_call object was present but unusable
  std::optional<MoveAction> action;
  std::optional<int> frontier_id;
  std::optional<std::string> answer;
  // ACTION / FRONTIER / ANSWER tags present with a non-empty value, even if
  // the value itself did not parse.
  bool has_action_segment = false;
  bool has_frontier_segment = false;
  bool has_answer_segment = false;

  int segments_present() const {
    return int(has_action_segment) + int(has_frontier_segment) + int(has_answer_segment);
  }

  friend bool operator==(const AgentResponse&, const AgentResponse&) = default;
};

/// Grammar: either a JSON object {"tool_call": {"query": "..."}} (anywhere in
/// the text), or free text with ACTION:, FRONTIER: and ANSWER: tags in any
/// order and any letter case. A tag's value runs up to the next tag. When a
/// tool call is found the tags are ignored. Never throws.
AgentResponse parse_response(std::string_view raw);

/// Canonical text form "ACTION: <a> FRONTIER: <id> ANSWER: <text>", omitting
/// absent fields; parse_response inverts it.
std::string format_response(std::optional<MoveAction> action, std::optional<int> frontier_id,
                            const std::optional<std::string>& answer);

std::string format_tool_call(std::string_view query);

}  // namespace memexplore
