#include "memexplore/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) {
    out.push_back(std::move(cur));
  }
  return out;
}

std::vector<std::string> content_tokens(std::string_view text) {
  static const std::set<std::string, std::less<>> kStop = {
      "a",     "an",   "the",  "is",    "are", "was",  "were", "of",  "in",    "on",
      "at",    "to",   "and",  "or",    "it",  "its",  "what", "which", "where", "how",
      "many",  "much", "does", "do",    "did", "there", "this", "that", "with",  "by",
      "for",   "from", "m",    "deg",   "x",   "bearing", "nothing", "view", "color", "state",
      "room",  "object", "closest", "near", "nearest", "you", "see", "saw",
  };
  std::vector<std::string> out;
  for (auto& tok : tokenize(text)) {
    const bool numeric = std::all_of(tok.begin(), tok.end(),
                                     [](unsigned char ch) { return std::isdigit(ch) != 0; });
    if (numeric || kStop.count(tok) != 0) {
      continue;
    }
    out.push_back(std::move(tok));
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    s += a[i] * b[i];
  }
  return s;
}

void canonical_normalize(std::vector<double>& v) {
  if (v.empty()) {
    return;
  }
  double sq = 0.0;
  for (double x : v) {
    sq += x * x;
  }
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return;
  }
  const double norm = std::sqrt(sq);
  for (double& x : v) {
    x /= norm;
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  // Walk one component at a time by ulps toward a self dot product of
  // exactly 1.0; a component whose ulp overshoots hands over to the next
  // smaller one.
  for (const std::size_t i : order) {
    for (int guard = 0; guard < 4096; ++guard) {
      const double self = dot(v, v);
      if (self == 1.0) {
        return;
      }
      const double old = v[i];
      const double mag = std::abs(old);
      v[i] = std::copysign(self > 1.0 ? std::nextafter(mag, 0.0) : std::nextafter(mag, 2.0), old);
      const double after = dot(v, v);
      if (after != 1.0 && (after > 1.0) != (self > 1.0)) {
        v[i] = old;
        break;
      }
    }
  }
}

std::vector<double> embed(const std::vector<std::string>& tokens, int dim) {
  if (dim < 2) {
    throw ContractViolation("embed: dimension must be >= 2");
  }
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  for (const auto& tok : tokens) {
    const std::uint64_t h = fnv1a64(tok);
    const auto idx = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[idx] += sign;
  }
  canonical_normalize(v);
  return v;
}

HashingProvider::HashingProvider(int dim) : dim_(dim) {
  if (dim < 2) {
    throw ContractViolation("HashingProvider: dimension must be >= 2");
  }
}

std::vector<double> HashingProvider::text(std::string_view caption) const {
  return embed(content_tokens(caption), dim_);
}

std::vector<double> HashingProvider::observation(std::string_view /*caption*/,
                                                 const std::vector<std::string>& visual_tokens) const {
  return embed(visual_tokens, dim_);
}

std::vector<double> HashingProvider::query(std::string_view text) const {
  return embed(content_tokens(text), dim_);
}

FeatureFileProvider::FeatureFileProvider(std::map<std::string, std::vector<double>> table, int dim)
    : table_(std::move(table)), dim_(dim), fallback_(dim) {
  for (auto& [id, vec] : table_) {
    if (static_cast<int>(vec.size()) != dim_) {
      throw InvariantError("feature file: vector '" + id + "' has dimension " +
                           std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    canonical_normalize(vec);
  }
}

namespace {

std::map<std::string, std::vector<double>> load_feature_table(const std::filesystem::path& path,
                                                              int& dim) {
  const auto doc = json_io::parse(json_io::read_text(path), "feature file");
  if (!doc.is_object() || doc.empty()) {
    throw ParseError("feature file: expected a non-empty object {id: vector}");
  }
  std::map<std::string, std::vector<double>> table;
  for (const auto& [id, vec] : doc.items()) {
    table[id] = json_io::number_list(vec, "feature file." + id);
  }
  dim = static_cast<int>(table.begin()->second.size());
  return table;
}

}  // namespace

FeatureFileProvider::FeatureFileProvider(const std::filesystem::path& path) : fallback_(2) {
  int dim = 0;
  auto table = load_feature_table(path, dim);
  *this = FeatureFileProvider(std::move(table), dim);
}

const std::vector<double>* FeatureFileProvider::lookup(const std::string& id) const {
  const auto it = table_.find(id);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<double> FeatureFileProvider::text(std::string_view caption) const {
  if (const auto* v = lookup(std::string(caption))) {
    return *v;
  }
  return fallback_.text(caption);
}

std::vector<double> FeatureFileProvider::observation(std::string_view caption,
                                                     const std::vector<std::string>& visual_tokens) const {
  if (const auto* v = lookup("obs:" + std::string(caption))) {
    return *v;
  }
  return fallback_.observation(caption, visual_tokens);
}

std::vector<double> FeatureFileProvider::query(std::string_view text) const {
  if (const auto* v = lookup(std::string(text))) {
    return *v;
  }
  return fallback_.query(text);
}

}  // namespace memexplore
