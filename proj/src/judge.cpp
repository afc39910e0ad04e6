#include "memexplore/judge.hpp"

#include <algorithm>
#include <cctype>

#include "memexplore/reward.hpp"

namespace memexplore {

namespace {

std::string canonical(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  std::string out = s.substr(b, e - b);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

int RuleJudge::score(const std::string& /*question*/, const std::string& reference, const std::string& predicted,
                     const std::string& /*goal_observation*/) const {
  if (canonical(reference) == canonical(predicted)) {
    return 5;
  }
  const double f1 = token_f1(predicted, reference);
  if (f1 >= 0.75) {
    return 4;
  }
  if (f1 >= 0.5) {
    return 3;
  }
  if (f1 >= 0.25) {
    return 2;
  }
  return 1;
}

}  // namespace memexplore
