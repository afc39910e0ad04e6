// Scripted out-of-process policy used by the protocol tests.
//
//   fake_policy_client <mode> [--listen <port> [--connections <n>]]
//
// Modes: stop, double_tool, tool_then_act, hang, garbage. Without --listen it
// serves stdin/stdout; with it, it accepts n TCP connections in turn.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <string>

#include "json.hpp"

namespace {

using nlohmann::json;

std::string answer_for(const json& req) {
  if (req.contains("question") && !req["question"]["choices"].empty()) {
    return req["question"]["choices"][0].get<std::string>();
  }
  return "unknown";
}

json act(const json& req, const std::string& action) {
  if (req.value("type", "") == "qa") {
    return json{{"v", 1}, {"type", "act"}, {"answer", answer_for(req)}};
  }
  return json{{"v", 1}, {"type", "act"}, {"action", action}};
}

/// Returns the reply line for one request, or an empty string for none.
std::string reply(const std::string& mode, const std::string& line) {
  const json req = json::parse(line, nullptr, false);
  if (req.is_discarded()) {
    return json{{"v", 1}, {"type", "error"}, {"message", "unparseable request"}}.dump();
  }
  const int round = req.value("round", 1);
  if (round == 1 && req.contains("memories")) {
    return json{{"v", 1}, {"type", "error"}, {"message", "memories in a first-round request"}}.dump();
  }
  if (mode == "stop") {
    return act(req, "stop").dump();
  }
  if (mode == "double_tool") {
    return json{{"v", 1}, {"type", "tool_call"}, {"query", "where is it"}}.dump();
  }
  if (mode == "tool_then_act") {
    if (round == 1) {
      return json{{"v", 1}, {"type", "tool_call"}, {"query", req.value("target", std::string("goal"))}}.dump();
    }
    if (!req.contains("memories") && !req.contains("tool_error")) {
      return json{{"v", 1}, {"type", "error"}, {"message", "second round without memories"}}.dump();
    }
    return act(req, "forward").dump();
  }
  if (mode == "hang") {
    return "";
  }
  if (mode == "garbage") {
    return "this is not json {";
  }
  return json{{"v", 1}, {"type", "error"}, {"message", "unknown mode " + mode}}.dump();
}

bool write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n <= 0) {
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void serve(const std::string& mode, int in_fd, int out_fd) {
  std::string buf;
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::read(in_fd, chunk, sizeof(chunk));
    if (n <= 0) {
      return;
    }
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl = 0;
    while ((nl = buf.find('\n')) != std::string::npos) {
      const std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      const std::string out = reply(mode, line);
      if (!out.empty() && !write_all(out_fd, out + "\n")) {
        return;
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: fake_policy_client <mode> [--listen <port> [--connections <n>]]\n");
    return 2;
  }
  const std::string mode = argv[1];
  int port = -1;
  int connections = 1;
  for (int i = 2; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--listen") == 0) {
      port = std::atoi(argv[i + 1]);
    } else if (std::strcmp(argv[i], "--connections") == 0) {
      connections = std::atoi(argv[i + 1]);
    }
  }
  if (port < 0) {
    serve(mode, 0, 1);
    return 0;
  }
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  const int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(srv, 4) != 0) {
    std::perror("fake_policy_client: listen");
    return 1;
  }
  for (int k = 0; k < connections; ++k) {
    const int c = ::accept(srv, nullptr, nullptr);
    if (c < 0) {
      break;
    }
    serve(mode, c, c);
    ::close(c);
  }
  ::close(srv);
  return 0;
}
