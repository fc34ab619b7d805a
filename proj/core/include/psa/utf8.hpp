#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace psa::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;
inline constexpr char32_t kZwnj = 0x200C;

struct DecodedChar {
  char32_t cp;
  std::size_t begin;  // byte offset into the source
  std::size_t end;
};

/// Decodes UTF-8; malformed sequences decode to U+FFFD one byte at a time so
/// offsets always land on the original bytes.
std::vector<DecodedChar> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_valid(std::string_view text);
std::size_t length(std::string_view text);

bool is_space(char32_t cp) noexcept;

/// Strips Unicode whitespace from both ends.
std::string_view trim(std::string_view text);

}  // namespace psa::utf8
