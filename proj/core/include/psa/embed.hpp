#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psa/preprocess.hpp"
#include "psa/tensor.hpp"

namespace psa {

inline constexpr std::size_t kDefaultEmbeddingDim = 300;
inline constexpr std::size_t kDefaultMaxLen = 100;

/// Word vectors loaded from the word-vector text format. Immutable once
/// loaded; lookups are safe from any thread.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::size_t declared_count);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t declared_count() const noexcept { return declared_count_; }
  std::size_t size() const noexcept { return index_.size(); }
  std::size_t duplicates() const noexcept { return duplicates_; }
  bool is_default_dim() const noexcept { return dim_ == kDefaultEmbeddingDim; }

  /// Returns the vector for `token`, or an empty span when out of vocabulary.
  std::span<const double> lookup(std::string_view token) const;
  bool contains(std::string_view token) const;

  /// Adds or replaces a vector; later insertions win.
  void insert(std::string token, std::span<const double> vector);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::size_t dim_;
  std::size_t declared_count_;
  std::size_t duplicates_ = 0;
  std::vector<double> storage_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::istream& in);

struct SentenceVector {
  std::vector<double> values;
  double coverage = 0.0;
};

struct SentenceMatrix {
  Tensor data;  // (max_len, dim)
  std::size_t true_len = 0;

  std::size_t rows() const { return data.dim(0); }
  std::size_t cols() const { return data.dim(1); }
};

/// Mean of in-vocabulary token vectors; zero vector when nothing is covered.
SentenceVector encode_mean(const TokenSeq& tokens, const EmbeddingTable& table);

/// Row i holds token i's vector (zero when out of vocabulary), truncated or
/// zero-padded to max_len rows.
SentenceMatrix encode_sequence(const TokenSeq& tokens, const EmbeddingTable& table,
                               std::size_t max_len);

}  // namespace psa

namespace psa {

/// Stacks encode_mean over many sequences: (N, dim).
Tensor encode_mean_batch(std::span<const TokenSeq> sequences, const EmbeddingTable& table);
/// Stacks encode_sequence over many sequences: (N, max_len, dim).
Tensor encode_sequence_batch(std::span<const TokenSeq> sequences, const EmbeddingTable& table,
                             std::size_t max_len);

}  // namespace psa
