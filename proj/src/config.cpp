#include "stimem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <sstream>

#include "stimem/errors.hpp"

namespace stimem {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return v;
}

}  // namespace

Config::Config(const std::vector<ConfigEntry>& schema) {
  for (const auto& e : schema) {
    values_[e.key] = e.value;
    help_[e.key] = e.help;
  }
}

bool Config::contains(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown key");
  it->second = trim(value);
}

void Config::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "expected key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Config::load_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string(), e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "top-level keys must live in a [section]");
    for (const auto& [name, leaf] : body) {
      if (!leaf.empty()) throw ConfigError(section + "." + name, "nested sections are not supported");
      set(section + "." + name, leaf.data());
    }
  }
}

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown key");
  return it->second;
}

const std::string& Config::help(const std::string& key) const {
  auto it = help_.find(key);
  if (it == help_.end()) throw ConfigError(key, "unknown key");
  return it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(key, raw(key)); }

int Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer");
  return static_cast<int>(v);
}

std::size_t Config::get_size(const std::string& key) const {
  const int v = get_int(key);
  if (v < 0) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (raw(key).empty()) return std::nullopt;
  return get_double(key);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

}  // namespace stimem
