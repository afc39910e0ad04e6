#include "memexplore/response.hpp"

#include <array>
#include <cctype>

#include "json.hpp"

namespace memexplore {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return std::string(s.substr(b, e - b));
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) {
    return false;
  }
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[pos + i])) != word[i]) {
      return false;
    }
  }
  return true;
}

// End index (exclusive) of the balanced JSON object starting at `open`, or
// npos when braces never balance.
std::size_t matching_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (ch == '\\') {
        escaped = true;
      } else if (ch == '"') {
        in_string = false;
      }
      continue;
    }
    if (ch == '"') {
      in_string = true;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}') {
      if (--depth == 0) {
        return i + 1;
      }
    }
  }
  return std::string_view::npos;
}

// Looks for a JSON object with a "tool_call" member. Returns false when none.
bool find_tool_call(std::string_view raw, AgentResponse& out) {
  const std::size_t key = raw.find("\"tool_call\"");
  if (key == std::string_view::npos) {
    return false;
  }
  for (std::size_t open = raw.rfind('{', key); open != std::string_view::npos;
       open = open == 0 ? std::string_view::npos : raw.rfind('{', open - 1)) {
    const std::size_t close = matching_brace(raw, open);
    if (close == std::string_view::npos || close <= key) {
      continue;
    }
    const json doc = json::parse(raw.substr(open, close - open), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("tool_call")) {
      continue;
    }
    const json& call = doc["tool_call"];
    if (call.is_object() && call.contains("query") && call["query"].is_string()) {
      out.tool_call = ToolCall{call["query"].get<std::string>()};
    } else if (call.is_string()) {
      out.tool_call = ToolCall{call.get<std::string>()};
    } else {
      out.tool_call_malformed = true;
    }
    return true;
  }
  out.tool_call_malformed = true;
  return true;
}

enum Tag { kAction = 0, kFrontier = 1, kAnswer = 2 };
constexpr std::array<std::string_view, 3> kTags = {"ACTION", "FRONTIER", "ANSWER"};

struct TagHit {
  std::size_t start = std::string_view::npos;  // tag start
  std::size_t value = 0;                       // first char after the colon
};

std::optional<int> first_integer(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool neg = s[i] == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]));
    if (!std::isdigit(static_cast<unsigned char>(s[i])) && !neg) {
      continue;
    }
    std::size_t j = neg ? i + 1 : i;
    long long v = 0;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
      v = v * 10 + (s[j] - '0');
      if (v > 1000000000LL) {
        return std::nullopt;
      }
      ++j;
    }
    return static_cast<int>(neg ? -v : v);
  }
  return std::nullopt;
}

}  // namespace

AgentResponse parse_response(std::string_view raw) {
  AgentResponse out;
  out.raw = std::string(raw);
  if (find_tool_call(raw, out)) {
    return out;
  }

  std::array<TagHit, 3> hits{};
  std::vector<std::size_t> starts;
  for (std::size_t pos = 0; pos < raw.size(); ++pos) {
    if (pos > 0 && std::isalnum(static_cast<unsigned char>(raw[pos - 1]))) {
      continue;
    }
    for (std::size_t t = 0; t < kTags.size(); ++t) {
      if (!iequals_at(raw, pos, kTags[t])) {
        continue;
      }
      std::size_t colon = pos + kTags[t].size();
      while (colon < raw.size() && (raw[colon] == ' ' || raw[colon] == '\t')) {
        ++colon;
      }
      if (colon >= raw.size() || raw[colon] != ':') {
        continue;
      }
      starts.push_back(pos);
      if (hits[t].start == std::string_view::npos) {
        hits[t] = TagHit{pos, colon + 1};
      }
    }
  }

  auto value_of = [&](const TagHit& hit) {
    std::size_t end = raw.size();
    for (std::size_t s : starts) {
      if (s > hit.start && s < end) {
        end = s;
      }
    }
    return trim(raw.substr(hit.value, end - hit.value));
  };

  if (hits[kAction].start != std::string_view::npos) {
    std::string v = value_of(hits[kAction]);
    out.has_action_segment = !v.empty();
    while (!v.empty() && std::ispunct(static_cast<unsigned char>(v.back())) && v.back() != '_') {
      v.pop_back();
    }
    out.action = parse_action(v);
  }
  if (hits[kFrontier].start != std::string_view::npos) {
    const std::string v = value_of(hits[kFrontier]);
    out.has_frontier_segment = !v.empty();
    out.frontier_id = first_integer(v);
  }
  if (hits[kAnswer].start != std::string_view::npos) {
    const std::string v = value_of(hits[kAnswer]);
    out.has_answer_segment = !v.empty();
    if (!v.empty()) {
      out.answer = v;
    }
  }
  return out;
}

std::string format_response(std::optional<MoveAction> action, std::optional<int> frontier_id,
                            const std::optional<std::string>& answer) {
  std::string out;
  auto add = [&](std::string_view tag, const std::string& value) {
    if (!out.empty()) {
      out += ' ';
    }
    out += tag;
    out += ": ";
    out += value;
  };
  if (action) {
    add("ACTION", std::string(to_string(*action)));
  }
  if (frontier_id) {
    add("FRONTIER", std::to_string(*frontier_id));
  }
  if (answer && !answer->empty()) {
    add("ANSWER", *answer);
  }
  return out;
}

std::string format_tool_call(std::string_view query) {
  json j;
  j["tool_call"]["query"] = std::string(query);
  return j.dump();
}

}  // namespace memexplore
