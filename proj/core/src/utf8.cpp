#include "psa/utf8.hpp"

namespace psa::utf8 {

namespace {

// Returns the sequence length for a valid lead byte, 0 otherwise.
std::size_t sequence_length(unsigned char lead) noexcept {
  if (lead < 0x80) return 1;
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  if (lead >= 0xE0 && lead <= 0xEF) return 3;
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  return 0;
}

bool is_continuation(unsigned char b) noexcept { return (b & 0xC0) == 0x80; }

// Decodes one scalar at `pos`; returns bytes consumed (0 when malformed).
std::size_t decode_one(std::string_view text, std::size_t pos, char32_t& cp) noexcept {
  const auto lead = static_cast<unsigned char>(text[pos]);
  const std::size_t len = sequence_length(lead);
  if (len == 0 || pos + len > text.size()) return 0;
  if (len == 1) {
    cp = lead;
    return 1;
  }
  char32_t value = lead & (0x7F >> len);
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if (!is_continuation(b)) return 0;
    value = (value << 6) | (b & 0x3F);
  }
  // Overlong forms, surrogates and values past U+10FFFF are rejected.
  if ((len == 3 && value < 0x800) || (len == 4 && value < 0x10000)) return 0;
  if (value >= 0xD800 && value <= 0xDFFF) return 0;
  if (value > 0x10FFFF) return 0;
  cp = value;
  return len;
}

}  // namespace

std::vector<DecodedChar> decode(std::string_view text) {
  std::vector<DecodedChar> out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = 0;
    std::size_t n = decode_one(text, pos, cp);
    if (n == 0) {
      cp = kReplacement;
      n = 1;
    }
    out.push_back({cp, pos, pos + n});
    pos += n;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size() * 2);
  for (char32_t cp : cps) append(out, cp);
  return out;
}

bool is_valid(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t n = decode_one(text, pos, cp);
    if (n == 0) return false;
    pos += n;
  }
  return true;
}

std::size_t length(std::string_view text) { return decode(text).size(); }

bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string_view trim(std::string_view text) {
  const auto chars = decode(text);
  std::size_t first = 0;
  while (first < chars.size() && is_space(chars[first].cp)) ++first;
  if (first == chars.size()) return text.substr(0, 0);
  std::size_t last = chars.size();
  while (last > first && is_space(chars[last - 1].cp)) --last;
  const std::size_t begin = chars[first].begin;
  return text.substr(begin, chars[last - 1].end - begin);
}

}  // namespace psa::utf8
