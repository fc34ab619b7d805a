#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psa {

/// Binary polarity. The numeric value doubles as the class index used by
/// every classifier: negative = 0, positive = 1.
enum class Polarity : std::uint8_t { negative = 0, positive = 1 };

inline constexpr std::size_t kNumPolarities = 2;

std::string_view to_token(Polarity p) noexcept;  // "neg" / "pos"
std::string_view to_name(Polarity p) noexcept;   // "negative" / "positive"
std::optional<Polarity> parse_polarity(std::string_view token) noexcept;

inline std::size_t class_index(Polarity p) noexcept { return static_cast<std::size_t>(p); }
Polarity polarity_from_index(std::size_t index);

struct Review {
  std::string id;
  std::string text;
  std::vector<Polarity> annotator_labels;  // empty, or exactly three votes
  std::optional<Polarity> label;

  friend bool operator==(const Review&, const Review&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Review> reviews;

  std::size_t size() const noexcept { return reviews.size(); }
  bool empty() const noexcept { return reviews.empty(); }
  bool fully_labeled() const noexcept;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitSpec {
  double train_fraction = 0.60;
  double test_fraction = 0.30;
  double valid_fraction = 0.10;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidSplit) unless every fraction is in (0,1) and they
  /// sum to 1 within 1e-9.
  void validate() const;
};

struct Split {
  Dataset train;
  Dataset test;
  Dataset valid;
};

inline constexpr std::size_t kMinSplitSize = 10;

/// Parses the dataset TSV contract. Header `id\ttext\tlabel` yields labeled
/// reviews; header `id\ttext\ta1\ta2\ta3` yields per-annotator votes with the
/// label filled in by majority vote.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, std::string name);

/// Writes the three-column labeled form; unlabeled reviews are rejected.
void write_dataset(std::ostream& out, const Dataset& dataset);

Review aggregate_labels(Review review);

/// Majority vote over three binary annotations.
Polarity majority_vote(const std::array<Polarity, 3>& votes) noexcept;

/// Seeded Fisher-Yates shuffle followed by a contiguous cut into
/// train | test | valid with floor-sized train and test parts.
Split split(const Dataset& dataset, const SplitSpec& spec);

struct SplitSizes {
  std::size_t train;
  std::size_t test;
  std::size_t valid;
};
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

}  // namespace psa
