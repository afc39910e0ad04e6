#pragma once

// Newline-delimited JSON between the engine and an out-of-process policy.
// Every message carries "v": 1. The engine sends "step" and "qa" requests;
// the policy answers each with exactly one "act", "tool_call" or "error".

#include <memory>
#include <optional>
#include <string>
#include <sys/types.h>

#include "json.hpp"
#include "memexplore/policy.hpp"

namespace memexplore {

inline constexpr int kProtocolVersion = 1;

nlohmann::json view_to_json(const View& view);
View view_from_json(const nlohmann::json& j, std::string_view where);

nlohmann::json request_to_json(const StepRequest& request);
/// Throws ParseError on schema errors.
StepRequest request_from_json(const nlohmann::json& j);

nlohmann::json response_to_json(const AgentResponse& response);
/// Throws ProtocolViolation for unknown types, wrong versions, "error"
/// messages and act messages that smuggle a tool call.
AgentResponse response_from_json(const nlohmann::json& j);

/// Bidirectional line stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  /// nullopt on timeout; throws ProtocolViolation when the peer closed.
  virtual std::optional<std::string> recv_line(double timeout_s) = 0;
};

/// Runs `/bin/sh -c command` with its stdin/stdout connected to the channel.
std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command);
/// Connects to a listening policy server.
std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, int port);

/// Endpoint forms: "spawn:<command>" or "tcp:<host>:<port>". One connection
/// per episode, opened in begin_episode and closed in end_episode.
class ExternalPolicy : public Policy {
 public:
  ExternalPolicy(std::string endpoint, double timeout_s);
  ~ExternalPolicy() override;

  std::string name() const override { return "external:" + endpoint_; }
  void begin_episode(const EpisodeContext& ctx) override;
  AgentResponse decide(const StepRequest& request) override;
  void end_episode() override;

 private:
  std::string endpoint_;
  double timeout_s_;
  std::unique_ptr<LineChannel> channel_;
};

}  // namespace memexplore
