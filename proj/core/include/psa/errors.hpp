#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psa {

enum class ErrorKind {
  // corpus
  MalformedRow,
  EmptyDataset,
  MissingAnnotations,
  UnlabeledReview,
  DatasetTooSmall,
  InvalidSplit,
  // embed
  BadHeader,
  DimensionMismatch,
  NonFiniteValue,
  // neuralcore
  ShapeMismatch,
  InputTooShort,
  NonFiniteInput,
  StaleCache,
  NonFiniteGradient,
  InvalidOptimizer,
  // models
  BadDimension,
  SequenceTooShort,
  EncodingMismatch,
  NonFiniteLoss,
  WrongModelKind,
  BadMagic,
  VersionUnsupported,
  ChecksumMismatch,
  ShapeHeaderMismatch,
  // eval
  LengthMismatch,
  EmptyMatrix,
  // plumbing
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type. `line()` is set for
// errors tied to a 1-based input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
};

}  // namespace psa
