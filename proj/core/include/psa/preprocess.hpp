#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace psa {

/// Ordered tokens plus the byte span each one came from in the text that was
/// handed to the producing function.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

/// Lookup tables driving normalization and stemming. The built-in tables are
/// the v1 tables; the same content ships as data files under core/data.
struct PreprocessTables {
  /// Codepoint folding. A mapped value of nullopt deletes the codepoint.
  std::unordered_map<char32_t, std::optional<char32_t>> folding;
  /// Suffixes in their canonical order; stemming picks the longest match.
  std::vector<std::string> suffixes;
  /// Surface form -> normal form, matched on whole words.
  std::map<std::string, std::string, std::less<>> slang;

  static const PreprocessTables& builtin();

  /// Reads folding-v1.tsv, suffixes-v1.txt and slang-v1.tsv from `dir`.
  static PreprocessTables load(const std::filesystem::path& dir);

  void write(const std::filesystem::path& dir) const;
};

bool is_punctuation(char32_t cp) noexcept;

class Preprocessor {
 public:
  Preprocessor();
  explicit Preprocessor(PreprocessTables tables);

  std::string normalize(std::string_view text) const;
  TokenSeq tokenize(std::string_view normalized) const;
  std::string stem(std::string_view token) const;

  /// normalize -> tokenize -> stem, with offsets into `text` itself.
  TokenSeq run(std::string_view text) const;

  const PreprocessTables& tables() const noexcept { return tables_; }

 private:
  struct SourceChar {
    char32_t cp;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<SourceChar> normalize_chars(std::string_view text) const;
  void apply_word_rules(std::vector<SourceChar>& word) const;

  PreprocessTables tables_;
  std::vector<std::vector<char32_t>> suffix_cps_;
};

// Convenience wrappers over a shared Preprocessor with the built-in tables.
std::string normalize(std::string_view text);
TokenSeq tokenize(std::string_view normalized);
std::string stem(std::string_view token);
TokenSeq preprocess_pipeline(std::string_view text);

}  // namespace psa
