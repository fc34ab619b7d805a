#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace psa::cli {

/// Values of the TOML subset the run configs use: strings, integers,
/// floats, booleans and flat numeric arrays.
using ConfigValue = std::variant<std::string, std::int64_t, double, bool, std::vector<double>>;

/// Flat view of a config file; keys are "table.key" ("key" at top level).
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> string(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<std::uint64_t> unsigned_integer(const std::string& key) const;
  std::optional<std::vector<std::size_t>> size_list(const std::string& key) const;

  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }

 private:
  std::map<std::string, ConfigValue> values_;
};

}  // namespace psa::cli
