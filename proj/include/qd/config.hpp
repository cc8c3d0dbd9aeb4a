#pragma once

#include <map>
#include <string>
#include <variant>

namespace qd::config {

// Configuration files use a small TOML subset:
//   - `[section]` headers; keys inside are addressed as "section.key"
//   - `key = value` pairs with bare keys [A-Za-z0-9_-]+
//   - values: "double-quoted strings" (escapes: \" \\ \n \t), booleans
//     true/false, and numbers (anything std::strtod fully consumes)
//   - `#` starts a comment outside strings; blank lines are ignored
// Duplicate keys, unterminated strings, and trailing garbage are errors
// that name the offending line.
using TomlValue = std::variant<bool, double, std::string>;
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable load_toml_file(const std::string& path);

bool has(const TomlTable& table, const std::string& key);

// Typed getters; a present key with the wrong type is an error naming the
// key, a missing key yields the fallback.
double get_number(const TomlTable& table, const std::string& key,
                  double fallback);
std::string get_string(const TomlTable& table, const std::string& key,
                       const std::string& fallback);
bool get_bool(const TomlTable& table, const std::string& key, bool fallback);

}  // namespace qd::config
