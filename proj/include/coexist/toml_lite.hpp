// A reader for the subset of TOML used by run configurations:
// tables, arrays of tables, dotted keys, strings, integers, floats,
// booleans, arrays and inline tables. Dates/times and multi-line strings
// are rejected. The document is returned as a JSON tree; every assigned key
// remembers where it was written.
#pragma once

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace coexist::toml {

using Json = nlohmann::json;

struct Position {
  int line = 1;
  int column = 1;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, Position pos)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column) + ": " +
                           msg),
        pos_(pos) {}
  [[nodiscard]] Position position() const noexcept { return pos_; }

 private:
  Position pos_;
};

struct Document {
  Json root = Json::object();
  std::map<std::string, Position> positions;  // "a.b[2].c" -> where it was set

  [[nodiscard]] Position position_of(const std::string& path) const {
    auto it = positions.find(path);
    return it == positions.end() ? Position{} : it->second;
  }
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document parse() {
    Document doc;
    current_ = &doc.root;
    current_path_.clear();
    doc_ = &doc;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        parse_header();
      } else {
        parse_key_value(*current_, current_path_);
      }
      expect_line_end();
    }
    return doc;
  }

 private:
  [[nodiscard]] bool eof() const noexcept { return pos_ >= text_.size(); }
  [[nodiscard]] char peek(std::size_t ahead = 0) const noexcept {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++here_.line;
      here_.column = 1;
    } else {
      ++here_.column;
    }
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, here_); }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') get();
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
        continue;
      }
      break;
    }
  }
  // Whitespace, comments and newlines (inside arrays).
  void skip_all() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
        continue;
      }
      break;
    }
  }
  void expect_line_end() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() == '\r') get();
    if (peek() != '\n') fail(std::string("expected end of line, found '") + peek() + "'");
    get();
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
  }

  std::string parse_simple_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && bare_key_char(peek())) key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts;
    skip_ws();
    parts.push_back(parse_simple_key());
    skip_ws();
    while (peek() == '.') {
      get();
      skip_ws();
      parts.push_back(parse_simple_key());
      skip_ws();
    }
    return parts;
  }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  // Descends into (or creates) table `key`; an array of tables resolves to its last element.
  Json* descend(Json& node, std::string& path, const std::string& key) {
    auto it = node.find(key);
    if (it == node.end()) {
      node[key] = Json::object();
      path = join(path, key);
      return &node[key];
    }
    if (it->is_object()) {
      path = join(path, key);
      return &*it;
    }
    if (it->is_array() && !it->empty() && it->back().is_object() && tables_arrays_.count(join(path, key))) {
      path = join(path, key) + "[" + std::to_string(it->size() - 1) + "]";
      return &it->back();
    }
    fail("key '" + key + "' is not a table");
  }

  void parse_header() {
    get();  // '['
    const bool array = peek() == '[';
    if (array) get();
    auto parts = parse_dotted_key();
    if (peek() != ']') fail("expected ']'");
    get();
    if (array) {
      if (peek() != ']') fail("expected ']]'");
      get();
    }
    Json* node = &doc_->root;
    std::string path;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = descend(*node, path, parts[i]);
    const std::string& last = parts.back();
    if (array) {
      const std::string apath = join(path, last);
      auto it = node->find(last);
      if (it == node->end()) {
        (*node)[last] = Json::array();
        tables_arrays_.insert(apath);
        doc_->positions[apath] = here_;
      } else if (!it->is_array() || !tables_arrays_.count(apath)) {
        fail("'" + apath + "' is not an array of tables");
      }
      auto& arr = (*node)[last];
      arr.push_back(Json::object());
      current_ = &arr.back();
      current_path_ = apath + "[" + std::to_string(arr.size() - 1) + "]";
    } else {
      const std::string tpath = join(path, last);
      auto it = node->find(last);
      if (it != node->end() && !it->is_object()) fail("'" + tpath + "' is not a table");
      if (defined_tables_.count(tpath)) fail("table '" + tpath + "' defined twice");
      defined_tables_.insert(tpath);
      current_ = descend(*node, path, last);
      current_path_ = path;
      doc_->positions[tpath] = here_;
    }
  }

  void parse_key_value(Json& table, const std::string& table_path) {
    const Position at = here_;
    auto parts = parse_dotted_key();
    if (peek() != '=') fail("expected '=' after key");
    get();
    skip_ws();
    Json* node = &table;
    std::string path = table_path;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = descend(*node, path, parts[i]);
    const std::string& last = parts.back();
    if (node->contains(last)) {
      here_ = at;
      fail("duplicate key '" + join(path, last) + "'");
    }
    const std::string full = join(path, last);
    (*node)[last] = parse_value(full);
    doc_->positions[full] = at;
  }

  Json parse_value(const std::string& path) {
    const char c = peek();
    if (c == '"') {
      if (peek(1) == '"' && peek(2) == '"') fail("multi-line strings are not supported");
      return parse_basic_string();
    }
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array(path);
    if (c == '{') return parse_inline_table(path);
    if (c == 't' || c == 'f') return parse_bool();
    if (c == '+' || c == '-' || c == 'i' || c == 'n' || std::isdigit(static_cast<unsigned char>(c))) {
      return parse_number();
    }
    if (eof() || c == '\n') fail("missing value");
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string parse_basic_string() {
    get();  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  std::string parse_literal_string() {
    get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  Json parse_bool() {
    if (text_.substr(pos_, 4) == "true") {
      for (int i = 0; i < 4; ++i) get();
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      for (int i = 0; i < 5; ++i) get();
      return false;
    }
    fail("invalid value");
  }

  Json parse_number() {
    const Position at = here_;
    std::string tok;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
        tok += get();
      } else {
        break;
      }
    }
    std::string body = tok;
    double sign = 1.0;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      sign = body[0] == '-' ? -1.0 : 1.0;
      body.erase(0, 1);
    }
    if (body == "inf") return sign * HUGE_VAL;
    if (body == "nan") return std::nan("");
    std::string clean;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        const bool ok = i > 0 && i + 1 < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i - 1])) &&
                        std::isdigit(static_cast<unsigned char>(tok[i + 1]));
        if (!ok) {
          here_ = at;
          fail("misplaced '_' in number '" + tok + "'");
        }
        continue;
      }
      clean += tok[i];
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    char* end = nullptr;
    if (is_float) {
      const double v = std::strtod(clean.c_str(), &end);
      if (end == clean.c_str() || *end != '\0' || clean.back() == '.' || clean.find(".e") != std::string::npos ||
          clean.find(".E") != std::string::npos) {
        here_ = at;
        fail("invalid number '" + tok + "'");
      }
      return v;
    }
    errno = 0;
    const long long v = std::strtoll(clean.c_str(), &end, 10);
    if (end == clean.c_str() || *end != '\0' || errno == ERANGE) {
      here_ = at;
      fail("invalid number '" + tok + "'");
    }
    return v;
  }

  Json parse_array(const std::string& path) {
    get();  // '['
    Json arr = Json::array();
    while (true) {
      skip_all();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(parse_value(path + "[" + std::to_string(arr.size()) + "]"));
      skip_all();
      if (peek() == ',') {
        get();
        continue;
      }
      if (peek() == ']') {
        get();
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Json parse_inline_table(const std::string& path) {
    get();  // '{'
    Json table = Json::object();
    skip_ws();
    if (peek() == '}') {
      get();
      return table;
    }
    while (true) {
      parse_key_value(table, path);
      skip_ws();
      if (peek() == ',') {
        get();
        skip_ws();
        continue;
      }
      if (peek() == '}') {
        get();
        return table;
      }
      fail("expected ',' or '}' in inline table");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Position here_;
  Document* doc_ = nullptr;
  Json* current_ = nullptr;
  std::string current_path_;
  std::set<std::string> tables_arrays_;
  std::set<std::string> defined_tables_;
};

}  // namespace detail

inline Document parse(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace coexist::toml
