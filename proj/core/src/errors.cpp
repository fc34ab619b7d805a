#include "psa/errors.hpp"

namespace psa {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingAnnotations: return "MissingAnnotations";
    case ErrorKind::UnlabeledReview: return "UnlabeledReview";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InputTooShort: return "InputTooShort";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::StaleCache: return "StaleCache";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::InvalidOptimizer: return "InvalidOptimizer";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::SequenceTooShort: return "SequenceTooShort";
    case ErrorKind::EncodingMismatch: return "EncodingMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::WrongModelKind: return "WrongModelKind";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionUnsupported: return "VersionUnsupported";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::ShapeHeaderMismatch: return "ShapeHeaderMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(const std::string& message, std::optional<std::size_t> line) {
  if (!line) return message;
  return "line " + std::to_string(*line) + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(decorate(message, line)), kind_(kind), line_(line) {}

}  // namespace psa
