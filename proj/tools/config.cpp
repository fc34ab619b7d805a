#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "psa/errors.hpp"

namespace psa::cli {

namespace {

[[noreturn]] void fail(const std::string& why, std::size_t line) {
  throw Error(ErrorKind::InvalidConfig, why, line);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_bare_key(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (quote == '"' && s[i] == '\\') {
      ++i;
    } else if (quote == 0 && (s[i] == '"' || s[i] == '\'')) {
      quote = s[i];
    } else if (quote != 0 && s[i] == quote) {
      quote = 0;
    } else if (quote == 0 && s[i] == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

// Integers stay integers so 64-bit seeds survive intact.
std::optional<ConfigValue> parse_number(std::string_view s) {
  std::string cleaned;
  for (char c : s) {
    if (c != '_') cleaned.push_back(c);
  }
  if (cleaned.empty()) return std::nullopt;
  const char* first = cleaned.data();
  const char* last = cleaned.data() + cleaned.size();
  if (*first == '+') ++first;
  if (cleaned.find_first_of(".eE") == std::string::npos) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
    return std::nullopt;
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

ConfigValue parse_value(std::string_view s, std::size_t line) {
  if (s.empty()) fail("missing value", line);
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail("unterminated string", line);
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] != '\\') {
        out.push_back(s[i]);
        continue;
      }
      if (i + 2 >= s.size()) fail("dangling escape", line);
      switch (s[++i]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail("unsupported escape", line);
      }
    }
    return out;
  }
  if (s.front() == '\'') {
    if (s.size() < 2 || s.back() != '\'') fail("unterminated string", line);
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') fail("unterminated array", line);
    std::vector<double> items;
    std::string_view inner = trim(s.substr(1, s.size() - 2));
    while (!inner.empty()) {
      const std::size_t comma = inner.find(',');
      const std::string_view item = trim(inner.substr(0, comma));
      if (!item.empty()) {
        const auto v = parse_number(item);
        if (!v) fail("arrays may only hold numbers", line);
        if (const auto* i = std::get_if<std::int64_t>(&*v)) {
          items.push_back(static_cast<double>(*i));
        } else {
          items.push_back(std::get<double>(*v));
        }
      }
      if (comma == std::string_view::npos) break;
      inner = trim(inner.substr(comma + 1));
    }
    return items;
  }
  const auto v = parse_number(s);
  if (!v) fail("unrecognised value '" + std::string(s) + "'", line);
  return *v;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string raw;
  std::string table;
  std::set<std::string> tables;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated table header", line);
      const std::string_view name = trim(s.substr(1, s.size() - 2));
      if (!is_bare_key(name)) fail("bad table name", line);
      if (!tables.insert(std::string(name)).second) fail("table [" + std::string(name) + "] defined twice", line);
      table = std::string(name);
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string_view::npos) fail("expected key = value", line);
    const std::string_view key = trim(s.substr(0, eq));
    if (!is_bare_key(key)) fail("bad key '" + std::string(key) + "'", line);
    const std::string full = table.empty() ? std::string(key) : table + "." + std::string(key);
    if (cfg.values_.count(full)) fail("duplicate key '" + full + "'", line);
    cfg.values_[full] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> ConfigFile::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error(ErrorKind::InvalidConfig, "'" + key + "' must be a string");
}

std::optional<double> ConfigFile::number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw Error(ErrorKind::InvalidConfig, "'" + key + "' must be a number");
}

std::optional<std::uint64_t> ConfigFile::unsigned_integer(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* i = std::get_if<std::int64_t>(&it->second);
  if (!i || *i < 0) throw Error(ErrorKind::InvalidConfig, "'" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(*i);
}

std::optional<std::vector<std::size_t>> ConfigFile::size_list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* arr = std::get_if<std::vector<double>>(&it->second);
  if (!arr) throw Error(ErrorKind::InvalidConfig, "'" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (double v : *arr) {
    if (v < 1 || v != std::floor(v)) {
      throw Error(ErrorKind::InvalidConfig, "'" + key + "' entries must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace psa::cli
