#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memexplore {

inline constexpr int kDefaultEmbeddingDim = 64;

/// FNV-1a 64-bit; fixed so feature hashing is identical on every platform.
std::uint64_t fnv1a64(std::string_view text);

/// Lowercase alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);
/// tokenize() minus purely numeric tokens and a small stopword list.
std::vector<std::string> content_tokens(std::string_view text);

/// Scales `v` to unit length, then nudges its largest component by ulps until
/// the left-to-right dot product of v with itself is exactly 1.0. A zero
/// vector becomes the first basis vector.
void canonical_normalize(std::vector<double>& v);

/// Plain left-to-right dot product; every similarity in the engine uses it.
double dot(std::span<const double> a, std::span<const double> b);

/// Feature hashing: each token maps to (index, sign) through FNV-1a, counts
/// accumulate, and the result is canonically normalized. An empty token list
/// yields the first basis vector. Requires dim >= 2.
std::vector<double> embed(const std::vector<std::string>& tokens, int dim = kDefaultEmbeddingDim);

/// Source of text / observation / query features. The hashing provider is the
/// default; FeatureFileProvider serves precomputed vectors from a JSON file.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  virtual std::vector<double> text(std::string_view caption) const = 0;
  virtual std::vector<double> observation(std::string_view caption,
                                          const std::vector<std::string>& visual_tokens) const = 0;
  virtual std::vector<double> query(std::string_view text) const = 0;
};

class HashingProvider : public EmbeddingProvider {
 public:
  explicit HashingProvider(int dim = kDefaultEmbeddingDim);
  int dimension() const override { return dim_; }
  std::vector<double> text(std::string_view caption) const override;
  std::vector<double> observation(std::string_view caption,
                                  const std::vector<std::string>& visual_tokens) const override;
  std::vector<double> query(std::string_view text) const override;

 private:
  int dim_;
};

/// JSON object {id: [..vector..]}. Text and query lookups use the text itself
/// as id, observations use "obs:" + caption. Misses fall back to hashing.
class FeatureFileProvider : public EmbeddingProvider {
 public:
  explicit FeatureFileProvider(const std::filesystem::path& path);
  FeatureFileProvider(std::map<std::string, std::vector<double>> table, int dim);

  int dimension() const override { return dim_; }
  std::vector<double> text(std::string_view caption) const override;
  std::vector<double> observation(std::string_view caption,
                                  const std::vector<std::string>& visual_tokens) const override;
  std::vector<double> query(std::string_view text) const override;
  std::size_t size() const { return table_.size(); }

 private:
  const std::vector<double>* lookup(const std::string& id) const;

  std::map<std::string, std::vector<double>> table_;
  int dim_ = kDefaultEmbeddingDim;
  HashingProvider fallback_;
};

}  // namespace memexplore
