#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mixcde {

// Flat key/value configuration parsed from a TOML-like text format.
//
// Supported syntax:
//   # comment lines and trailing comments
//   key = value            (bare keys: letters, digits, '_', '-', '.')
//   [section]              (keys below get "section." prefixed)
//   value forms: "quoted string", true/false, integer, float
//
// Keys are reported in dotted form ("mcmc.iters"). Typed getters parse on
// demand and throw ParseError (with the defining line number) on mismatch.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::vector<std::string> keys() const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint64(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  struct Entry {
    std::string raw;      // value token with quotes already stripped
    bool was_quoted = false;
    long line = 0;
  };
  const Entry& require(const std::string& key) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace mixcde
