#ifndef CFPO_CONFIG_HPP_
#define CFPO_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cfpo/errors.hpp"

namespace cfpo {

// Scalar or flat array value of the config grammar (see README for the
// grammar). Integers and floats are distinct types and round-trip as such.
struct ConfigValue {
  using Array = std::vector<ConfigValue>;
  std::variant<bool, std::int64_t, double, std::string, Array> v;

  ConfigValue() : v(false) {}
  ConfigValue(bool b) : v(b) {}
  ConfigValue(std::int64_t i) : v(i) {}
  ConfigValue(int i) : v(static_cast<std::int64_t>(i)) {}
  ConfigValue(double d) : v(d) {}
  ConfigValue(const char* s) : v(std::string(s)) {}
  ConfigValue(std::string s) : v(std::move(s)) {}
  ConfigValue(Array a) : v(std::move(a)) {}

  bool is_array() const { return std::holds_alternative<Array>(v); }
  bool operator==(const ConfigValue&) const = default;
};

std::string serialize_value(const ConfigValue& value);

// Parsed document: an ordered flat map from dotted key path to value.
// Nesting comes from [section] headers and dotted keys; sweep overrides
// mutate entries by path.
class ConfigDoc {
 public:
  static ConfigDoc parse_string(const std::string& text);
  static ConfigDoc parse_file(const std::filesystem::path& path);

  std::string serialize() const;

  bool has(const std::string& path) const;
  const ConfigValue& at(const std::string& path) const;  // ConfigError if absent
  void set(const std::string& path, ConfigValue value);  // insert or replace

  // Typed access; errors name the missing/mistyped field.
  bool get_bool(const std::string& path) const;
  std::int64_t get_int(const std::string& path) const;
  double get_double(const std::string& path) const;  // accepts integer values
  std::string get_string(const std::string& path) const;
  ConfigValue::Array get_array(const std::string& path) const;

  bool get_bool_or(const std::string& path, bool fallback) const;
  std::int64_t get_int_or(const std::string& path, std::int64_t fallback) const;
  double get_double_or(const std::string& path, double fallback) const;
  std::string get_string_or(const std::string& path, const std::string& fallback) const;

  const std::vector<std::pair<std::string, ConfigValue>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, ConfigValue>> entries_;
};

}  // namespace cfpo

#endif  // CFPO_CONFIG_HPP_
