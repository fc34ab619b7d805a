#include "psa/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "psa/errors.hpp"
#include "psa/rng.hpp"
#include "psa/utf8.hpp"

namespace psa {

std::string_view to_token(Polarity p) noexcept {
  return p == Polarity::positive ? "pos" : "neg";
}

std::string_view to_name(Polarity p) noexcept {
  return p == Polarity::positive ? "positive" : "negative";
}

std::optional<Polarity> parse_polarity(std::string_view token) noexcept {
  if (token == "pos") return Polarity::positive;
  if (token == "neg") return Polarity::negative;
  return std::nullopt;
}

Polarity polarity_from_index(std::size_t index) {
  if (index >= kNumPolarities) {
    throw Error(ErrorKind::BadDimension, "class index " + std::to_string(index) +
                                             " has no polarity");
  }
  return static_cast<Polarity>(index);
}

bool Dataset::fully_labeled() const noexcept {
  for (const auto& r : reviews) {
    if (!r.label) return false;
  }
  return true;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, test_fraction, valid_fraction}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw Error(ErrorKind::InvalidSplit, "split fractions must each lie in (0,1)");
    }
  }
  const double sum = train_fraction + test_fraction + valid_fraction;
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidSplit,
                "split fractions sum to " + std::to_string(sum) + ", expected 1");
  }
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

enum class Layout { labeled, annotated };

}  // namespace

Dataset parse_dataset(std::istream& in, std::string name) {
  Dataset dataset;
  dataset.name = std::move(name);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::EmptyDataset, "dataset '" + dataset.name + "' has no header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Layout layout;
  const auto header = split_tabs(line);
  if (header == std::vector<std::string_view>{"id", "text", "label"}) {
    layout = Layout::labeled;
  } else if (header == std::vector<std::string_view>{"id", "text", "a1", "a2", "a3"}) {
    layout = Layout::annotated;
  } else {
    throw Error(ErrorKind::MalformedRow, "unrecognised header", line_no);
  }
  const std::size_t columns = layout == Layout::labeled ? 3 : 5;

  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find('\r') != std::string::npos) {
      throw Error(ErrorKind::MalformedRow, "carriage return in row (LF endings required)",
                  line_no);
    }
    const auto fields = split_tabs(line);
    if (fields.size() != columns) {
      throw Error(ErrorKind::MalformedRow,
                  "expected " + std::to_string(columns) + " columns, found " +
                      std::to_string(fields.size()),
                  line_no);
    }
    Review review;
    review.id = std::string(fields[0]);
    if (review.id.empty()) throw Error(ErrorKind::MalformedRow, "empty id", line_no);
    if (!seen.insert(review.id).second) {
      throw Error(ErrorKind::MalformedRow, "duplicate id '" + review.id + "'", line_no);
    }
    if (!utf8::is_valid(fields[1])) {
      throw Error(ErrorKind::MalformedRow, "text is not valid UTF-8", line_no);
    }
    if (utf8::trim(fields[1]).empty()) {
      throw Error(ErrorKind::MalformedRow, "empty text", line_no);
    }
    review.text = std::string(fields[1]);

    if (layout == Layout::labeled) {
      const auto label = parse_polarity(fields[2]);
      if (!label) {
        throw Error(ErrorKind::MalformedRow, "bad label token '" + std::string(fields[2]) + "'",
                    line_no);
      }
      review.label = label;
    } else {
      for (std::size_t i = 2; i < 5; ++i) {
        const auto vote = parse_polarity(fields[i]);
        if (!vote) {
          throw Error(ErrorKind::MalformedRow,
                      "bad annotator token '" + std::string(fields[i]) + "'", line_no);
        }
        review.annotator_labels.push_back(*vote);
      }
      review = aggregate_labels(std::move(review));
    }
    dataset.reviews.push_back(std::move(review));
  }

  if (dataset.reviews.empty()) {
    throw Error(ErrorKind::EmptyDataset, "dataset '" + dataset.name + "' has no data rows");
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path.string());
  return parse_dataset(in, path.stem().string());
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << "id\ttext\tlabel\n";
  for (const auto& r : dataset.reviews) {
    if (!r.label) throw Error(ErrorKind::UnlabeledReview, "review '" + r.id + "' is unlabeled");
    out << r.id << '\t' << r.text << '\t' << to_token(*r.label) << '\n';
  }
}

Polarity majority_vote(const std::array<Polarity, 3>& votes) noexcept {
  int positives = 0;
  for (Polarity v : votes) positives += v == Polarity::positive ? 1 : 0;
  return positives >= 2 ? Polarity::positive : Polarity::negative;
}

Review aggregate_labels(Review review) {
  if (review.annotator_labels.size() != 3) {
    throw Error(ErrorKind::MissingAnnotations,
                "review '" + review.id + "' has " +
                    std::to_string(review.annotator_labels.size()) + " annotations, expected 3");
  }
  review.label = majority_vote(
      {review.annotator_labels[0], review.annotator_labels[1], review.annotator_labels[2]});
  return review;
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The epsilon absorbs representation error such as 0.3 * 10 = 2.9999...
  const auto part = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  };
  SplitSizes sizes{part(spec.train_fraction), part(spec.test_fraction), 0};
  sizes.valid = n - sizes.train - sizes.test;
  return sizes;
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  for (const auto& r : dataset.reviews) {
    if (!r.label) throw Error(ErrorKind::UnlabeledReview, "review '" + r.id + "' is unlabeled");
  }
  const std::size_t n = dataset.size();
  if (n < kMinSplitSize) {
    throw Error(ErrorKind::DatasetTooSmall, "dataset has " + std::to_string(n) +
                                                " reviews; splitting needs at least " +
                                                std::to_string(kMinSplitSize));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256 rng(spec.seed);
  fisher_yates(std::span<std::size_t>(order), rng);

  const SplitSizes sizes = split_sizes(n, spec);
  Split out;
  out.train.name = dataset.name + ".train";
  out.test.name = dataset.name + ".test";
  out.valid.name = dataset.name + ".valid";
  for (std::size_t i = 0; i < n; ++i) {
    const Review& r = dataset.reviews[order[i]];
    if (i < sizes.train) {
      out.train.reviews.push_back(r);
    } else if (i < sizes.train + sizes.test) {
      out.test.reviews.push_back(r);
    } else {
      out.valid.reviews.push_back(r);
    }
  }
  return out;
}

}  // namespace psa
