#include "mixcde/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mixcde/errors.hpp"

namespace mixcde {

namespace {

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Parses a double-quoted string starting at s[pos] == '"'. Leaves pos one past
// the closing quote.
std::string parse_quoted(const std::string& s, size_t& pos, long line) {
  std::string out;
  ++pos;  // opening quote
  while (pos < s.size()) {
    const char c = s[pos++];
    if (c == '"') return out;
    if (c == '\\') {
      if (pos >= s.size()) break;
      const char esc = s[pos++];
      switch (esc) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default:
          throw ParseError(std::string("config: unsupported escape '\\") + esc + "'", line);
      }
    } else {
      out += c;
    }
  }
  throw ParseError("config: unterminated string", line);
}

bool validate_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key)
    if (!is_key_char(c)) return false;
  return key.find("..") == std::string::npos;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = trim(raw_line);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      const size_t close = line.find(']');
      if (close == std::string::npos)
        throw ParseError("config: missing ']' in section header", line_no);
      const std::string rest = trim(line.substr(close + 1));
      if (!rest.empty() && rest.front() != '#')
        throw ParseError("config: trailing content after section header", line_no);
      section = trim(line.substr(1, close - 1));
      if (!validate_key(section)) throw ParseError("config: invalid section name", line_no);
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config: expected 'key = value'", line_no);
    std::string key = trim(line.substr(0, eq));
    if (!validate_key(key)) throw ParseError("config: invalid key '" + key + "'", line_no);
    if (!section.empty()) key = section + "." + key;

    std::string rhs = trim(line.substr(eq + 1));
    if (rhs.empty()) throw ParseError("config: missing value for '" + key + "'", line_no);

    Entry entry;
    entry.line = line_no;
    if (rhs.front() == '"') {
      size_t pos = 0;
      entry.raw = parse_quoted(rhs, pos, line_no);
      entry.was_quoted = true;
      const std::string rest = trim(rhs.substr(pos));
      if (!rest.empty() && rest.front() != '#')
        throw ParseError("config: trailing content after string value", line_no);
    } else {
      const size_t hash = rhs.find('#');
      if (hash != std::string::npos) rhs = trim(rhs.substr(0, hash));
      if (rhs.empty()) throw ParseError("config: missing value for '" + key + "'", line_no);
      for (char c : rhs)
        if (std::isspace(static_cast<unsigned char>(c)))
          throw ParseError("config: unquoted value may not contain spaces", line_no);
      entry.raw = rhs;
    }
    if (cfg.entries_.count(key))
      throw ParseError("config: duplicate key '" + key + "'", line_no);
    cfg.entries_.emplace(std::move(key), std::move(entry));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

const Config::Entry& Config::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ParseError("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return require(key).raw; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const Entry& e = require(key);
  const char* begin = e.raw.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (e.was_quoted || end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError("config: '" + key + "' is not an integer", e.line);
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& key) const {
  const Entry& e = require(key);
  const char* begin = e.raw.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (e.was_quoted || end == begin || *end != '\0' || errno == ERANGE || e.raw.front() == '-')
    throw ParseError("config: '" + key + "' is not an unsigned integer", e.line);
  return v;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_uint64(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const Entry& e = require(key);
  const char* begin = e.raw.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (e.was_quoted || end == begin || *end != '\0')
    throw ParseError("config: '" + key + "' is not a number", e.line);
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  const Entry& e = require(key);
  if (!e.was_quoted) {
    if (e.raw == "true") return true;
    if (e.raw == "false") return false;
  }
  throw ParseError("config: '" + key + "' is not a boolean", e.line);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

}  // namespace mixcde
