#include "cfpo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cfpo {

namespace {

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void skip_ws() {
    while (!done() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
};

[[noreturn]] void fail(int line, const std::string& msg) { throw ConfigError(line, msg); }

std::string parse_quoted(Cursor& c) {
  // Opening quote consumed by caller.
  std::string out;
  while (true) {
    if (c.done()) fail(c.line, "unterminated string");
    const char ch = c.text[c.pos++];
    if (ch == '"') return out;
    if (ch == '\\') {
      if (c.done()) fail(c.line, "dangling escape in string");
      const char esc = c.text[c.pos++];
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(c.line, std::string("unknown escape '\\") + esc + "'");
      }
    } else {
      out += ch;
    }
  }
}

// One dotted key: bare and/or quoted segments joined by '.'.
std::string parse_key(Cursor& c) {
  std::string path;
  while (true) {
    c.skip_ws();
    if (c.done()) fail(c.line, "expected key segment");
    std::string segment;
    if (c.peek() == '"') {
      ++c.pos;
      segment = parse_quoted(c);
      if (segment.empty()) fail(c.line, "empty quoted key");
    } else {
      while (!c.done() && is_bare_key_char(c.peek())) segment += c.text[c.pos++];
      if (segment.empty()) fail(c.line, "expected key segment");
    }
    path += segment;
    c.skip_ws();
    if (!c.done() && c.peek() == '.') {
      ++c.pos;
      path += '.';
      continue;
    }
    return path;
  }
}

ConfigValue parse_scalar_or_array(Cursor& c, bool allow_array);

ConfigValue parse_scalar(Cursor& c) {
  c.skip_ws();
  if (c.done()) fail(c.line, "expected value");
  const char ch = c.peek();
  if (ch == '"') {
    ++c.pos;
    return ConfigValue(parse_quoted(c));
  }
  // bare token: bool or number
  std::string tok;
  while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != ' ' &&
         c.peek() != '\t') {
    tok += c.text[c.pos++];
  }
  if (tok.empty()) fail(c.line, "expected value");
  if (tok == "true") return ConfigValue(true);
  if (tok == "false") return ConfigValue(false);

  const bool int_like = tok.find_first_not_of("+-0123456789") == std::string::npos &&
                        tok.find_first_of("0123456789") != std::string::npos;
  if (int_like) {
    errno = 0;
    char* end = nullptr;
    const long long value = std::strtoll(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size()) {
      fail(c.line, "integer out of range: '" + tok + "'");
    }
    return ConfigValue(static_cast<std::int64_t>(value));
  }
  char* end = nullptr;
  const double value = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) fail(c.line, "malformed value '" + tok + "'");
  return ConfigValue(value);
}

ConfigValue parse_scalar_or_array(Cursor& c, bool allow_array) {
  c.skip_ws();
  if (c.done()) fail(c.line, "expected value");
  if (c.peek() == '[') {
    if (!allow_array) fail(c.line, "nested arrays are not supported");
    ++c.pos;
    ConfigValue::Array items;
    while (true) {
      c.skip_ws();
      if (c.done()) fail(c.line, "unterminated array");
      if (c.peek() == ']') {
        ++c.pos;
        break;
      }
      items.push_back(parse_scalar_or_array(c, false));
      c.skip_ws();
      if (c.done()) fail(c.line, "unterminated array");
      if (c.peek() == ',') {
        ++c.pos;
        continue;
      }
      if (c.peek() == ']') {
        ++c.pos;
        break;
      }
      fail(c.line, "expected ',' or ']' in array");
    }
    return ConfigValue(std::move(items));
  }
  return parse_scalar(c);
}

// Removes a trailing comment, respecting quotes.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (ch == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (ch == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool needs_quoting(const std::string& segment) {
  if (segment.empty()) return true;
  return !std::all_of(segment.begin(), segment.end(), is_bare_key_char);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += ch;
    }
  }
  return out + "\"";
}

}  // namespace

std::string serialize_value(const ConfigValue& value) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", d);
      std::string s = buf;
      // Keep the float/integer distinction through round trips.
      if (s.find_first_of(".eE") == std::string::npos &&
          s.find_first_of("0123456789") != std::string::npos) {
        s += ".0";
      }
      return s;
    }
    std::string operator()(const std::string& s) const { return quote(s); }
    std::string operator()(const ConfigValue::Array& a) const {
      std::string out = "[";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i > 0) out += ", ";
        out += serialize_value(a[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, value.v);
}

ConfigDoc ConfigDoc::parse_string(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "expected ']' to close section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      Cursor c{inner, 0, line_no};
      section = parse_key(c);
      c.skip_ws();
      if (!c.done()) fail(line_no, "unexpected characters after section name");
      continue;
    }

    Cursor c{line, 0, line_no};
    const std::string key = parse_key(c);
    c.skip_ws();
    if (c.done() || c.peek() != '=') fail(line_no, "expected '=' after key '" + key + "'");
    ++c.pos;
    const ConfigValue value = parse_scalar_or_array(c, true);
    c.skip_ws();
    if (!c.done()) fail(line_no, "unexpected characters after value");

    const std::string path = section.empty() ? key : section + "." + key;
    if (doc.has(path)) fail(line_no, "duplicate key '" + path + "'");
    doc.entries_.emplace_back(path, value);
  }
  return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

std::string ConfigDoc::serialize() const {
  // Emit dotless keys first (a bare key after a section header would change
  // its meaning), then one section per table prefix in first-seen order.
  auto split = [](const std::string& path) {
    const std::size_t dot = path.rfind('.');
    return dot == std::string::npos
               ? std::pair<std::string, std::string>{"", path}
               : std::pair<std::string, std::string>{path.substr(0, dot),
                                                     path.substr(dot + 1)};
  };
  auto emit_key = [&](const std::string& key) {
    return needs_quoting(key) ? quote(key) : key;
  };

  std::vector<std::string> tables;
  for (const auto& [path, value] : entries_) {
    const auto [table, key] = split(path);
    if (!table.empty() && std::find(tables.begin(), tables.end(), table) == tables.end()) {
      tables.push_back(table);
    }
  }

  std::string out;
  for (const auto& [path, value] : entries_) {
    const auto [table, key] = split(path);
    if (table.empty()) out += emit_key(key) + " = " + serialize_value(value) + "\n";
  }
  for (const std::string& table : tables) {
    out += "\n[" + table + "]\n";
    for (const auto& [path, value] : entries_) {
      const auto [tab, key] = split(path);
      if (tab == table) out += emit_key(key) + " = " + serialize_value(value) + "\n";
    }
  }
  return out;
}

bool ConfigDoc::has(const std::string& path) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == path; });
}

const ConfigValue& ConfigDoc::at(const std::string& path) const {
  for (const auto& e : entries_) {
    if (e.first == path) return e.second;
  }
  throw ConfigError("missing required field '" + path + "'");
}

void ConfigDoc::set(const std::string& path, ConfigValue value) {
  for (auto& e : entries_) {
    if (e.first == path) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(path, std::move(value));
}

bool ConfigDoc::get_bool(const std::string& path) const {
  const ConfigValue& v = at(path);
  if (const bool* b = std::get_if<bool>(&v.v)) return *b;
  throw ConfigError("field '" + path + "' must be a boolean");
}

std::int64_t ConfigDoc::get_int(const std::string& path) const {
  const ConfigValue& v = at(path);
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v.v)) return *i;
  throw ConfigError("field '" + path + "' must be an integer");
}

double ConfigDoc::get_double(const std::string& path) const {
  const ConfigValue& v = at(path);
  if (const double* d = std::get_if<double>(&v.v)) return *d;
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v.v)) {
    return static_cast<double>(*i);
  }
  throw ConfigError("field '" + path + "' must be a number");
}

std::string ConfigDoc::get_string(const std::string& path) const {
  const ConfigValue& v = at(path);
  if (const std::string* s = std::get_if<std::string>(&v.v)) return *s;
  throw ConfigError("field '" + path + "' must be a string");
}

ConfigValue::Array ConfigDoc::get_array(const std::string& path) const {
  const ConfigValue& v = at(path);
  if (const ConfigValue::Array* a = std::get_if<ConfigValue::Array>(&v.v)) return *a;
  throw ConfigError("field '" + path + "' must be an array");
}

bool ConfigDoc::get_bool_or(const std::string& path, bool fallback) const {
  return has(path) ? get_bool(path) : fallback;
}

std::int64_t ConfigDoc::get_int_or(const std::string& path, std::int64_t fallback) const {
  return has(path) ? get_int(path) : fallback;
}

double ConfigDoc::get_double_or(const std::string& path, double fallback) const {
  return has(path) ? get_double(path) : fallback;
}

std::string ConfigDoc::get_string_or(const std::string& path,
                                     const std::string& fallback) const {
  return has(path) ? get_string(path) : fallback;
}

}  // namespace cfpo
