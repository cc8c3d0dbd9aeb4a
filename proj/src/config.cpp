#include "qd/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qd/errors.hpp"

namespace qd::config {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw DomainError("config line " + std::to_string(line) + ": " + what);
}

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s, int line) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;  // skip the escaped character
        if (i >= s.size()) fail(line, "dangling escape in string");
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  if (in_string) fail(line, "unterminated string");
  return s;
}

std::string parse_string(const std::string& raw, int line) {
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    ++i;
    switch (raw[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: fail(line, "unsupported escape in string");
    }
  }
  return out;
}

TomlValue parse_value(const std::string& raw, int line) {
  if (raw.empty()) fail(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      fail(line, "unterminated string");
    return parse_string(raw, line);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  const char* begin = raw.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end != begin + raw.size())
    fail(line, "unrecognized value '" + raw + "'");
  return x;
}

const TomlValue* find(const TomlTable& table, const std::string& key) {
  auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw, line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      std::string name = trim(s.substr(1, s.size() - 2));
      if (name.empty()) fail(line, "empty section name");
      for (char c : name)
        if (!bare_key_char(c)) fail(line, "invalid section name '" + name + "'");
      section = name;
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    for (char c : key)
      if (!bare_key_char(c)) fail(line, "invalid key '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) fail(line, "duplicate key '" + full + "'");
    table[full] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return table;
}

TomlTable load_toml_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot open config file: " + path);
  std::ostringstream text;
  text << file.rdbuf();
  return parse_toml(text.str());
}

bool has(const TomlTable& table, const std::string& key) {
  return table.count(key) != 0;
}

double get_number(const TomlTable& table, const std::string& key,
                  double fallback) {
  const TomlValue* v = find(table, key);
  if (!v) return fallback;
  if (const double* x = std::get_if<double>(v)) return *x;
  throw DomainError("config key '" + key + "' must be a number");
}

std::string get_string(const TomlTable& table, const std::string& key,
                       const std::string& fallback) {
  const TomlValue* v = find(table, key);
  if (!v) return fallback;
  if (const std::string* s = std::get_if<std::string>(v)) return *s;
  throw DomainError("config key '" + key + "' must be a string");
}

bool get_bool(const TomlTable& table, const std::string& key, bool fallback) {
  const TomlValue* v = find(table, key);
  if (!v) return fallback;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  throw DomainError("config key '" + key + "' must be a boolean");
}

}  // namespace qd::config
