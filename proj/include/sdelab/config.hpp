// Minimal structured-text config: [dotted.table] headers, key = value pairs,
// numbers/bools/strings, nested arrays. Errors carry line and column.
#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdelab/errors.hpp"

namespace sdelab {

class ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
using ConfigTable = std::map<std::string, ConfigValue>;

class ConfigValue {
 public:
  std::variant<bool, double, std::string, ConfigArray, ConfigTable> v;

  ConfigValue() : v(false) {}
  explicit ConfigValue(bool b) : v(b) {}
  explicit ConfigValue(double d) : v(d) {}
  explicit ConfigValue(std::string s) : v(std::move(s)) {}
  explicit ConfigValue(ConfigArray a) : v(std::move(a)) {}
  explicit ConfigValue(ConfigTable t) : v(std::move(t)) {}

  bool is_table() const { return std::holds_alternative<ConfigTable>(v); }
  bool is_array() const { return std::holds_alternative<ConfigArray>(v); }
  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }

  double as_number(const std::string& what) const {
    if (!is_number()) throw ValidationError(what + ": expected a number");
    return std::get<double>(v);
  }
  bool as_bool(const std::string& what) const {
    if (!is_bool()) throw ValidationError(what + ": expected a boolean");
    return std::get<bool>(v);
  }
  const std::string& as_string(const std::string& what) const {
    if (!is_string()) throw ValidationError(what + ": expected a string");
    return std::get<std::string>(v);
  }
  const ConfigArray& as_array(const std::string& what) const {
    if (!is_array()) throw ValidationError(what + ": expected an array");
    return std::get<ConfigArray>(v);
  }
  const ConfigTable& as_table(const std::string& what) const {
    if (!is_table()) throw ValidationError(what + ": expected a table");
    return std::get<ConfigTable>(v);
  }
};

class Config {
 public:
  ConfigTable root;

  const ConfigValue* find(const std::string& dotted) const {
    const ConfigTable* t = &root;
    size_t pos = 0;
    while (true) {
      const size_t dot = dotted.find('.', pos);
      const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
      const auto it = t->find(key);
      if (it == t->end()) return nullptr;
      if (dot == std::string::npos) return &it->second;
      if (!it->second.is_table()) return nullptr;
      t = &std::get<ConfigTable>(it->second.v);
      pos = dot + 1;
    }
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  double number_or(const std::string& key, double fallback) const {
    const auto* v = find(key);
    return v ? v->as_number(key) : fallback;
  }
  bool bool_or(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    return v ? v->as_bool(key) : fallback;
  }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? v->as_string(key) : fallback;
  }
  double require_number(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw ValidationError("missing required key '" + key + "'");
    return v->as_number(key);
  }
  std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : v->as_array(key)) out.push_back(item.as_number(key));
    return out;
  }
};

namespace detail {

class ConfigParser {
 public:
  explicit ConfigParser(std::string_view text) : text_(text) {}

  Config parse() {
    Config cfg;
    ConfigTable* current = &cfg.root;
    while (!at_end()) {
      skip_blank();
      if (at_end()) break;
      if (peek() == '[') {
        current = parse_table_header(cfg.root);
      } else {
        parse_key_value(*current);
      }
    }
    return cfg;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_blank() {
    while (!at_end()) {
      skip_spaces();
      if (at_end()) return;
      if (peek() == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (peek() == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  void expect_line_end() {
    skip_spaces();
    if (at_end()) return;
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
    if (at_end()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    advance();
  }

  std::string parse_bare_key() {
    std::string key;
    while (!at_end() && (std::isalnum(uint8_t(peek())) || peek() == '_' || peek() == '-'))
      key.push_back(text_[pos_]), advance();
    if (key.empty()) fail("expected a key");
    return key;
  }

  ConfigTable* parse_table_header(ConfigTable& root) {
    advance();  // '['
    ConfigTable* t = &root;
    while (true) {
      skip_spaces();
      const std::string key = parse_bare_key();
      auto [it, inserted] = t->try_emplace(key, ConfigValue(ConfigTable{}));
      if (!inserted && !it->second.is_table()) fail("'" + key + "' is not a table");
      t = &std::get<ConfigTable>(it->second.v);
      skip_spaces();
      if (at_end()) fail("unterminated table header");
      if (peek() == '.') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        break;
      }
      fail("expected '.' or ']' in table header");
    }
    expect_line_end();
    return t;
  }

  void parse_key_value(ConfigTable& table) {
    const std::string key = parse_bare_key();
    skip_spaces();
    if (at_end() || peek() != '=') fail("expected '=' after key '" + key + "'");
    advance();
    skip_spaces();
    table.insert_or_assign(key, parse_value());
    expect_line_end();
  }

  ConfigValue parse_value() {
    if (at_end()) fail("expected a value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (std::isalpha(uint8_t(c))) {
      const std::string word = parse_bare_key();
      if (word == "true") return ConfigValue(true);
      if (word == "false") return ConfigValue(false);
      fail("unknown literal '" + word + "'");
    }
    return parse_number();
  }

  ConfigValue parse_string() {
    advance();  // '"'
    std::string s;
    while (!at_end() && peek() != '"') {
      if (peek() == '\n') fail("unterminated string");
      s.push_back(text_[pos_]);
      advance();
    }
    if (at_end()) fail("unterminated string");
    advance();
    return ConfigValue(std::move(s));
  }

  ConfigValue parse_array() {
    advance();  // '['
    ConfigArray arr;
    while (true) {
      skip_blank();
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        advance();
        break;
      }
      arr.push_back(parse_value());
      skip_blank();
      if (at_end()) fail("unterminated array");
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        break;
      }
      fail("expected ',' or ']' in array");
    }
    return ConfigValue(std::move(arr));
  }

  ConfigValue parse_number() {
    const size_t start = pos_;
    while (!at_end() && (std::isdigit(uint8_t(peek())) || peek() == '+' || peek() == '-' ||
                         peek() == '.' || peek() == 'e' || peek() == 'E'))
      advance();
    if (pos_ == start) fail("expected a value");
    const std::string token(text_.substr(start, pos_ - start));
    try {
      size_t used = 0;
      const double d = std::stod(token, &used);
      if (used != token.size()) fail("malformed number '" + token + "'");
      return ConfigValue(d);
    } catch (const std::invalid_argument&) {
      fail("malformed number '" + token + "'");
    } catch (const std::out_of_range&) {
      fail("number out of range '" + token + "'");
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline Config parse_config(std::string_view text) { return detail::ConfigParser(text).parse(); }

}  // namespace sdelab
