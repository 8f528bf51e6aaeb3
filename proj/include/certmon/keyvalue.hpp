#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace certmon {

/// Plain "key = value" config text. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  /// Comma-separated list of doubles.
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

  /// Keys that were present but never read; used to reject typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

std::vector<double> parse_double_list(const std::string& text);
double parse_double(const std::string& text);
std::uint64_t parse_uint(const std::string& text);

}  // namespace certmon
