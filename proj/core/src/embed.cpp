#include "psa/embed.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "psa/errors.hpp"

namespace psa {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::size_t declared_count)
    : dim_(dim), declared_count_(declared_count) {
  if (dim == 0) throw Error(ErrorKind::BadHeader, "embedding dimension must be positive");
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return {};
  return {storage_.data() + it->second * dim_, dim_};
}

bool EmbeddingTable::contains(std::string_view token) const { return index_.find(token) != index_.end(); }

void EmbeddingTable::insert(std::string token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "vector for '" + token + "' has " +
                                                  std::to_string(vector.size()) +
                                                  " components, table dim is " +
                                                  std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "non-finite component for '" + token + "'");
  }
  if (auto it = index_.find(token); it != index_.end()) {
    ++duplicates_;
    std::copy(vector.begin(), vector.end(), storage_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    return;
  }
  index_.emplace(std::move(token), index_.size());
  storage_.insert(storage_.end(), vector.begin(), vector.end());
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

std::optional<std::size_t> parse_count(std::string_view s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::BadHeader, "missing header line", 1);
  const auto header = split_spaces(line);
  if (header.size() != 2) throw Error(ErrorKind::BadHeader, "header must be '<count> <dim>'", 1);
  const auto count = parse_count(header[0]);
  const auto dim = parse_count(header[1]);
  if (!count || !dim || *dim == 0) {
    throw Error(ErrorKind::BadHeader, "header must be '<count> <dim>'", 1);
  }

  EmbeddingTable table(*dim, *count);
  std::vector<double> vec(*dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (fields.size() != *dim + 1) {
      throw Error(ErrorKind::DimensionMismatch,
                  "expected " + std::to_string(*dim) + " components, found " +
                      std::to_string(fields.size() - 1),
                  line_no);
    }
    for (std::size_t i = 0; i < *dim; ++i) {
      const auto f = fields[i + 1];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec == std::errc::result_out_of_range) {
        throw Error(ErrorKind::NonFiniteValue, "value '" + std::string(f) + "' overflows", line_no);
      }
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorKind::DimensionMismatch, "unparseable component '" + std::string(f) + "'",
                    line_no);
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteValue, "non-finite component '" + std::string(f) + "'",
                    line_no);
      }
      vec[i] = v;
    }
    table.insert(std::string(fields[0]), vec);
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open embeddings " + path.string());
  return parse_embeddings(in);
}

SentenceVector encode_mean(const TokenSeq& tokens, const EmbeddingTable& table) {
  SentenceVector out;
  out.values.assign(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& token : tokens.tokens) {
    const auto v = table.lookup(token);
    if (v.empty()) continue;
    ++hits;
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += v[i];
  }
  if (hits > 0) {
    for (double& x : out.values) x /= static_cast<double>(hits);
    out.coverage = static_cast<double>(hits) / static_cast<double>(tokens.size());
  }
  return out;
}

SentenceMatrix encode_sequence(const TokenSeq& tokens, const EmbeddingTable& table,
                               std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorKind::BadDimension, "max_len must be at least 1");
  SentenceMatrix out{Tensor({max_len, table.dim()}), std::min(tokens.size(), max_len)};
  for (std::size_t row = 0; row < out.true_len; ++row) {
    const auto v = table.lookup(tokens.tokens[row]);
    if (v.empty()) continue;
    std::copy(v.begin(), v.end(), out.data.data() + row * table.dim());
  }
  return out;
}

}  // namespace psa

namespace psa {

Tensor encode_mean_batch(std::span<const TokenSeq> sequences, const EmbeddingTable& table) {
  if (sequences.empty()) throw Error(ErrorKind::EncodingMismatch, "nothing to encode");
  Tensor out({sequences.size(), table.dim()});
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto v = encode_mean(sequences[i], table);
    std::copy(v.values.begin(), v.values.end(), out.data() + i * table.dim());
  }
  return out;
}

Tensor encode_sequence_batch(std::span<const TokenSeq> sequences, const EmbeddingTable& table,
                             std::size_t max_len) {
  if (sequences.empty()) throw Error(ErrorKind::EncodingMismatch, "nothing to encode");
  const std::size_t stride = max_len * table.dim();
  Tensor out({sequences.size(), max_len, table.dim()});
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto m = encode_sequence(sequences[i], table, max_len);
    std::copy(m.data.values().begin(), m.data.values().end(), out.data() + i * stride);
  }
  return out;
}

}  // namespace psa
