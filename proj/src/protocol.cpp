#include "memexplore/protocol.hpp"

#include <arpa/inet.h>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

using nlohmann::json;

namespace {

json visible_to_json(const VisibleObject& o) {
  return json{{"tag", o.tag},       {"distance", o.distance}, {"bearing", o.bearing}, {"region", o.region},
              {"color", o.color},   {"state", o.state},       {"count", o.count}};
}

std::string_view to_string(RequestType t) { return t == RequestType::Step ? "step" : "qa"; }

}  // namespace

json view_to_json(const View& view) {
  json objs = json::array();
  for (const auto& o : view.visible) {
    objs.push_back(visible_to_json(o));
  }
  return json{{"relative_heading", view.relative_heading}, {"visible", objs}};
}

View view_from_json(const json& j, std::string_view where) {
  const std::string w(where);
  View v;
  v.relative_heading = json_io::number(j, "relative_heading", w);
  if (!j.contains("visible") || !j["visible"].is_array()) {
    throw ParseError(w + ": missing array 'visible'");
  }
  for (const auto& o : j["visible"]) {
    VisibleObject obj;
    obj.tag = json_io::string(o, "tag", w + ".visible");
    obj.distance = json_io::number(o, "distance", w + ".visible");
    obj.bearing = json_io::number(o, "bearing", w + ".visible");
    obj.region = json_io::string(o, "region", w + ".visible", "");
    obj.color = json_io::string(o, "color", w + ".visible", "");
    obj.state = json_io::string(o, "state", w + ".visible", "");
    obj.count = json_io::integer(o, "count", w + ".visible", 1);
    v.visible.push_back(std::move(obj));
  }
  return v;
}

json request_to_json(const StepRequest& r) {
  json j;
  j["v"] = kProtocolVersion;
  j["type"] = std::string(to_string(r.type));
  j["round"] = r.round;
  j["step"] = r.step;
  j["subtask_index"] = r.subtask_index;
  j["instruction"] = r.instruction;
  j["subtask"] = r.subtask;
  j["target"] = r.target;
  j["pose"] = json_io::to_json(r.pose);
  j["views"] = json::array();
  for (const auto& v : r.views) {
    j["views"].push_back(view_to_json(v));
  }
  j["frontiers"] = json::array();
  for (const auto& f : r.frontiers) {
    j["frontiers"].push_back(json{{"id", f.id},
                                  {"nav_point", json_io::to_json(f.nav_point)},
                                  {"steering_bearing", f.steering_bearing},
                                  {"distance", f.distance},
                                  {"geodesic", f.geodesic},
                                  {"snapshot", view_to_json(f.snapshot)}});
  }
  if (r.question) {
    j["question"] = json{{"index", r.question->index},
                         {"text", r.question->question},
                         {"qtype", std::string(memexplore::to_string(r.question->qtype))},
                         {"format", std::string(memexplore::to_string(r.question->format))},
                         {"choices", r.question->choices}};
  }
  if (r.memories) {
    json mems = json::array();
    for (const auto& m : *r.memories) {
      mems.push_back(json{{"index", m.index},
                          {"caption", m.caption},
                          {"pose", json_io::to_json(m.pose)},
                          {"score", m.score},
                          {"channel", std::string(memexplore::to_string(m.channel))}});
    }
    j["memories"] = mems;
  }
  if (r.tool_error) {
    j["tool_error"] = *r.tool_error;
  }
  j["budget"] = r.budget;
  return j;
}

StepRequest request_from_json(const json& j) {
  const std::string w = "request";
  if (!j.is_object()) {
    throw ParseError("request: expected an object");
  }
  if (json_io::integer(j, "v", w) != kProtocolVersion) {
    throw ParseError("request.v: unsupported protocol version");
  }
  StepRequest r;
  const auto type = json_io::string(j, "type", w);
  if (type == "step") {
    r.type = RequestType::Step;
  } else if (type == "qa") {
    r.type = RequestType::QA;
  } else {
    throw ParseError("request.type: expected step or qa, got '" + type + "'");
  }
  r.round = json_io::integer(j, "round", w, 1);
  r.step = json_io::integer(j, "step", w, 0);
  r.subtask_index = json_io::integer(j, "subtask_index", w, 0);
  r.instruction = json_io::string(j, "instruction", w, "");
  r.subtask = json_io::string(j, "subtask", w, "");
  r.target = json_io::string(j, "target", w, "");
  if (j.contains("pose")) {
    r.pose = json_io::pose(j["pose"], "request.pose");
  }
  if (j.contains("views")) {
    if (!j["views"].is_array() || j["views"].size() != 3) {
      throw ParseError("request.views: expected exactly 3 views");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      r.views[i] = view_from_json(j["views"][i], "request.views[" + std::to_string(i) + "]");
    }
  }
  if (j.contains("frontiers")) {
    for (const auto& f : j["frontiers"]) {
      FrontierInfo info;
      info.id = json_io::integer(f, "id", "request.frontiers");
      if (f.contains("nav_point")) {
        info.nav_point = json_io::pose(f["nav_point"], "request.frontiers.nav_point");
      }
      info.steering_bearing = json_io::number(f, "steering_bearing", "request.frontiers", 0.0);
      info.distance = json_io::number(f, "distance", "request.frontiers", 0.0);
      info.geodesic = json_io::number(f, "geodesic", "request.frontiers", -1.0);
      if (f.contains("snapshot")) {
        info.snapshot = view_from_json(f["snapshot"], "request.frontiers.snapshot");
      }
      r.frontiers.push_back(std::move(info));
    }
  }
  if (j.contains("question")) {
    const auto& q = j["question"];
    QuestionInfo info;
    info.index = json_io::integer(q, "index", "request.question", 0);
    info.question = json_io::string(q, "text", "request.question");
    const auto qt = parse_question_type(json_io::string(q, "qtype", "request.question", "attribute"));
    const auto fmt = parse_answer_format(json_io::string(q, "format", "request.question", "choice"));
    if (!qt || !fmt) {
      throw ParseError("request.question: unknown qtype or format");
    }
    info.qtype = *qt;
    info.format = *fmt;
    if (q.contains("choices")) {
      info.choices = json_io::string_list(q["choices"], "request.question.choices");
    }
    r.question = std::move(info);
  }
  if (j.contains("memories")) {
    std::vector<MemoryRecord> mems;
    for (const auto& m : j["memories"]) {
      MemoryRecord rec;
      rec.index = json_io::integer(m, "index", "request.memories");
      rec.caption = json_io::string(m, "caption", "request.memories");
      if (m.contains("pose")) {
        rec.pose = json_io::pose(m["pose"], "request.memories.pose");
      }
      rec.score = json_io::number(m, "score", "request.memories", 0.0);
      rec.channel = json_io::string(m, "channel", "request.memories", "text") == "obs" ? Channel::Obs : Channel::Text;
      mems.push_back(std::move(rec));
    }
    r.memories = std::move(mems);
  }
  if (j.contains("tool_error")) {
    r.tool_error = json_io::string(j, "tool_error", w);
  }
  r.budget = json_io::integer(j, "budget", w, 0);
  return r;
}

json response_to_json(const AgentResponse& r) {
  json j;
  j["v"] = kProtocolVersion;
  if (r.tool_call) {
    j["type"] = "tool_call";
    j["query"] = r.tool_call->query;
    return j;
  }
  j["type"] = "act";
  if (r.action) {
    j["action"] = std::string(to_string(*r.action));
  }
  if (r.frontier_id) {
    j["frontier"] = *r.frontier_id;
  }
  if (r.answer) {
    j["answer"] = *r.answer;
  }
  j["raw"] = r.raw;
  return j;
}

AgentResponse response_from_json(const json& j) {
  if (!j.is_object()) {
    throw ProtocolViolation("response is not a JSON object");
  }
  if (j.contains("v") && (!j["v"].is_number_integer() || j["v"].get<int>() != kProtocolVersion)) {
    throw ProtocolViolation("response has unsupported protocol version");
  }
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ProtocolViolation("response lacks a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  if (type == "error") {
    const std::string msg = j.contains("message") && j["message"].is_string() ? j["message"].get<std::string>() : "";
    throw ProtocolViolation("policy reported an error: " + msg);
  }
  if (type == "tool_call") {
    if (!j.contains("query") || !j["query"].is_string()) {
      AgentResponse r = parse_response(j.dump());
      r.tool_call.reset();
      r.tool_call_malformed = true;
      return r;
    }
    return tool_response(j["query"].get<std::string>());
  }
  if (type != "act") {
    throw ProtocolViolation("response type '" + type + "' is not act, tool_call or error");
  }
  AgentResponse r;
  if (j.contains("raw") && j["raw"].is_string()) {
    r = parse_response(j["raw"].get<std::string>());
  } else {
    std::optional<MoveAction> action;
    std::optional<int> frontier;
    std::optional<std::string> answer;
    if (j.contains("action") && j["action"].is_string()) {
      action = parse_action(j["action"].get<std::string>());
      if (!action) {
        throw ProtocolViolation("unknown action '" + j["action"].get<std::string>() + "'");
      }
    }
    if (j.contains("frontier") && j["frontier"].is_number_integer()) {
      frontier = j["frontier"].get<int>();
    }
    if (j.contains("answer") && j["answer"].is_string()) {
      answer = j["answer"].get<std::string>();
    }
    r = act_response(action, frontier, answer);
  }
  if (r.tool_call || r.tool_call_malformed) {
    throw ProtocolViolation("act response carries a tool call");
  }
  return r;
}

namespace {

class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, pid_t child) : rfd_(read_fd), wfd_(write_fd), child_(child) {}
  ~FdChannel() override {
    if (wfd_ >= 0 && wfd_ != rfd_) {
      ::close(wfd_);
    }
    if (rfd_ >= 0) {
      ::close(rfd_);
    }
    if (child_ > 0) {
      reap();
    }
  }

  void send_line(const std::string& line) override {
    std::string data = line;
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = child_ > 0 ? ::write(wfd_, data.data() + off, data.size() - off)
                                   : ::send(wfd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw ProtocolViolation(std::string("policy connection write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> recv_line(double timeout_s) override {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        return std::nullopt;
      }
      pollfd p{rfd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (rc < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw ProtocolViolation(std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) {
        continue;
      }
      char chunk[4096];
      const ssize_t n = ::read(rfd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) {
          continue;
        }
        throw ProtocolViolation(std::string("policy connection read failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        throw ProtocolViolation("policy closed the connection");
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void reap() {
    for (int i = 0; i < 100; ++i) {
      int status = 0;
      const pid_t r = ::waitpid(child_, &status, WNOHANG);
      if (r == child_ || r < 0) {
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(child_, SIGKILL);
    int status = 0;
    ::waitpid(child_, &status, 0);
  }

  int rfd_;
  int wfd_;
  pid_t child_;
  std::string buf_;
};

}  // namespace

std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command) {
  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) {
    throw ProtocolViolation("pipe failed");
  }
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ProtocolViolation("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    throw ProtocolViolation("fork failed");
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw ProtocolViolation("cannot resolve policy host '" + host + "'");
  }
  int fd = -1;
  for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) {
      continue;
    }
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      break;
    }
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ProtocolViolation("cannot connect to policy at " + host + ":" + service);
  }
  return std::make_unique<FdChannel>(fd, fd, 0);
}

ExternalPolicy::ExternalPolicy(std::string endpoint, double timeout_s)
    : endpoint_(std::move(endpoint)), timeout_s_(timeout_s) {
  if (endpoint_.rfind("spawn:", 0) != 0 && endpoint_.rfind("tcp:", 0) != 0) {
    throw ContractViolation("external policy endpoint must be spawn:<command> or tcp:<host>:<port>, got '" +
                            endpoint_ + "'");
  }
  if (!(timeout_s_ > 0.0)) {
    throw ContractViolation("external policy timeout must be positive");
  }
}

ExternalPolicy::~ExternalPolicy() = default;

void ExternalPolicy::begin_episode(const EpisodeContext& /*ctx*/) {
  channel_.reset();
  if (endpoint_.rfind("spawn:", 0) == 0) {
    channel_ = spawn_process_channel(endpoint_.substr(6));
    return;
  }
  const std::string rest = endpoint_.substr(4);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    throw ContractViolation("tcp endpoint must be tcp:<host>:<port>");
  }
  int port = 0;
  try {
    port = std::stoi(rest.substr(colon + 1));
  } catch (const std::exception&) {
    throw ContractViolation("tcp endpoint has an invalid port: '" + rest + "'");
  }
  channel_ = connect_tcp_channel(rest.substr(0, colon), port);
}

AgentResponse ExternalPolicy::decide(const StepRequest& request) {
  if (!channel_) {
    throw ContractViolation("external policy: begin_episode was not called");
  }
  channel_->send_line(request_to_json(request).dump());
  const auto line = channel_->recv_line(timeout_s_);
  if (!line) {
    throw ProtocolViolation("policy response timed out after " + std::to_string(timeout_s_) + " s");
  }
  const json j = json::parse(*line, nullptr, false);
  if (j.is_discarded()) {
    throw ProtocolViolation("malformed response line: " + line->substr(0, 200));
  }
  return response_from_json(j);
}

void ExternalPolicy::end_episode() { channel_.reset(); }

}  // namespace memexplore
