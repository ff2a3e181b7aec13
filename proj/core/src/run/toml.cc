#include "slr/run/toml.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace slr {

namespace {

bool IsBareKeyChar(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Json Document() {
    Json root = Json::object();
    Json* table = &root;
    std::set<std::string> headers;
    while (true) {
      SkipBlank(true);
      if (AtEnd()) break;
      if (Peek() == '[') {
        ++pos_;
        if (!AtEnd() && Peek() == '[') Fail("arrays of tables are not supported");
        std::vector<std::string> path;
        std::string full;
        while (true) {
          SkipBlank(false);
          path.push_back(Key());
          full += (full.empty() ? "" : ".") + path.back();
          SkipBlank(false);
          if (!AtEnd() && Peek() == '.') {
            ++pos_;
            continue;
          }
          Expect(']');
          break;
        }
        if (!headers.insert(full).second) Fail("table [" + full + "] defined twice");
        table = &root;
        for (const std::string& k : path) {
          if (!table->contains(k)) (*table)[k] = Json::object();
          table = &(*table)[k];
          if (!table->is_object()) Fail("'" + k + "' is not a table");
        }
        EndOfLine();
        continue;
      }
      const std::string key = Key();
      SkipBlank(false);
      Expect('=');
      SkipBlank(false);
      if (table->contains(key)) Fail("duplicate key '" + key + "'");
      (*table)[key] = Value();
      EndOfLine();
    }
    return root;
  }

  Json SingleValue() {
    SkipBlank(false);
    Json v = Value();
    SkipBlank(false);
    if (!AtEnd()) Fail("trailing characters after value");
    return v;
  }

 private:
  bool AtEnd() const { return pos_ >= s_.size(); }
  char Peek() const { return s_[pos_]; }

  [[noreturn]] void Fail(const std::string& what) const { throw TomlError(line_, what); }

  void Expect(char c) {
    if (AtEnd() || Peek() != c) Fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // spaces and tabs; with newlines, also line breaks and comments
  void SkipBlank(bool newlines) {
    while (!AtEnd()) {
      const char c = Peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (newlines && c == '\n') {
        ++pos_;
        ++line_;
      } else if (newlines && c == '#') {
        while (!AtEnd() && Peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void EndOfLine() {
    SkipBlank(false);
    if (!AtEnd() && Peek() == '#') {
      while (!AtEnd() && Peek() != '\n') ++pos_;
    }
    if (AtEnd()) return;
    if (Peek() != '\n') Fail("expected end of line");
    ++pos_;
    ++line_;
  }

  std::string Key() {
    if (!AtEnd() && Peek() == '"') return String();
    const std::size_t start = pos_;
    while (!AtEnd() && IsBareKeyChar(Peek())) ++pos_;
    if (pos_ == start) Fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string String() {
    Expect('"');
    std::string out;
    while (true) {
      if (AtEnd() || Peek() == '\n') Fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (AtEnd()) Fail("unterminated string");
      const char e = s_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: Fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  Json Value() {
    if (AtEnd()) Fail("missing value");
    const char c = Peek();
    if (c == '"') return String();
    if (c == '[') return Array();
    const std::size_t start = pos_;
    while (!AtEnd() && (IsBareKeyChar(Peek()) || Peek() == '.' || Peek() == '+')) {
      ++pos_;
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok.empty()) Fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    return Number(tok);
  }

  Json Array() {
    Expect('[');
    Json arr = Json::array();
    while (true) {
      SkipBlank(true);
      if (AtEnd()) Fail("unterminated array");
      if (Peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(Value());
      SkipBlank(true);
      if (AtEnd()) Fail("unterminated array");
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != ']') {
        Fail("expected ',' or ']' in array");
      }
    }
  }

  Json Number(std::string_view tok) {
    std::string t;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        const bool ok = i > 0 && i + 1 < tok.size() && std::isdigit(tok[i - 1]) &&
                        std::isdigit(tok[i + 1]);
        if (!ok) Fail("misplaced '_' in number");
        continue;
      }
      t += tok[i];
    }
    bool negative = false;
    std::string_view body = t;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      negative = body[0] == '-';
      body.remove_prefix(1);
    }
    if (body == "inf") {
      return negative ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    }
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string_view::npos;
    if (body.empty() || !std::isdigit(static_cast<unsigned char>(body[0]))) {
      Fail("invalid value '" + std::string(tok) + "'");
    }
    // from_chars rejects a leading '+', so parse the signed text without it
    const std::string signed_text = (negative ? "-" : "") + std::string(body);
    const char* first = signed_text.data();
    const char* last = first + signed_text.size();
    if (is_float) {
      double v = 0.0;
      const auto r = std::from_chars(first, last, v);
      if (r.ec != std::errc() || r.ptr != last) {
        Fail("invalid float '" + std::string(tok) + "'");
      }
      return v;
    }
    std::int64_t v = 0;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last) {
      Fail("invalid integer '" + std::string(tok) + "'");
    }
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string FormatFloat(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string FormatKey(const std::string& k) {
  for (char c : k) {
    if (!IsBareKeyChar(c)) return Quote(k);
  }
  return k.empty() ? Quote(k) : k;
}

std::string FormatValue(const Json& v) {
  switch (v.type()) {
    case Json::value_t::string: return Quote(v.get<std::string>());
    case Json::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case Json::value_t::number_integer: return std::to_string(v.get<std::int64_t>());
    case Json::value_t::number_unsigned: return std::to_string(v.get<std::uint64_t>());
    case Json::value_t::number_float: return FormatFloat(v.get<double>());
    case Json::value_t::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += FormatValue(v[i]);
      }
      return out + "]";
    }
    default:
      throw std::invalid_argument("toml: cannot write a " + std::string(v.type_name()));
  }
}

void WriteTable(const Json& table, const std::string& path, std::string& out) {
  if (!path.empty()) {
    if (!out.empty()) out += "\n";
    out += "[" + path + "]\n";
  }
  for (const auto& [k, v] : table.items()) {
    if (!v.is_object()) out += FormatKey(k) + " = " + FormatValue(v) + "\n";
  }
  for (const auto& [k, v] : table.items()) {
    if (v.is_object()) WriteTable(v, path.empty() ? FormatKey(k) : path + "." + FormatKey(k), out);
  }
}

}  // namespace

Json ParseToml(std::string_view text) { return Parser(text).Document(); }

Json ParseTomlValue(std::string_view text) { return Parser(text).SingleValue(); }

std::string WriteToml(const Json& root) {
  if (!root.is_object()) throw std::invalid_argument("toml: root must be a table");
  std::string out;
  WriteTable(root, "", out);
  return out;
}

}  // namespace slr
