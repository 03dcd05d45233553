#pragma once

// Flat key=value configuration with [section] headers. Keys are
// "section.name"; only keys present in the schema are accepted.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stimem {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string help;
};

class Config {
public:
  Config() = default;
  explicit Config(const std::vector<ConfigEntry>& schema);

  bool contains(const std::string& key) const;
  // Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  // "section.name=value"
  void assign(const std::string& assignment);
  // INI file; every key must already exist.
  void load_file(const std::filesystem::path& path);

  const std::string& raw(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  // Empty value -> nullopt.
  std::optional<double> get_optional_double(const std::string& key) const;
  // Comma-separated numbers.
  std::vector<double> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  const std::string& help(const std::string& key) const;

private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> help_;
};

}  // namespace stimem
