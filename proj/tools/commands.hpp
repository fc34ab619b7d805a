#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "psa/corpus.hpp"
#include "psa/models.hpp"
#include "psa/optimizer.hpp"

namespace psa::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct CliOptions {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> input;  // predict: file of lines
  std::optional<std::string> text;             // predict: a single review
};

/// Everything a run needs, after defaults, config file and flag overrides.
/// Relative paths in the config file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path embeddings;
  std::filesystem::path model_path;
  std::filesystem::path report_path;

  ModelKind kind = ModelKind::mlp;
  std::size_t num_classes = 2;
  std::size_t max_len = 100;
  std::vector<std::size_t> mlp_hidden = kDefaultMlpHidden;
  std::vector<std::size_t> autoencoder_hidden = kDefaultAutoencoderHidden;
  std::vector<std::size_t> head_hidden = kDefaultMlpHidden;
  CnnOptions cnn;

  std::uint64_t seed = 0;
  SplitSpec split;
  OptimizerConfig optimizer;
  OptimizerConfig autoencoder_optimizer;
};

/// Reads defaults, then the config file (if any), then flag overrides.
/// Throws Error(InvalidConfig) for anything malformed.
RunConfig resolve_config(const CliOptions& options);

/// Checks every path the command reads exists and every numeric field is in
/// range. Throws Error(InvalidConfig) and friends.
void validate_for(const std::string& command, const RunConfig& config);

std::string display_name(ModelKind kind);

int cmd_train(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_predict(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_preprocess(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Never throws; failures become an exit code
/// and a single `psa: error ...` line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psa::cli
