#ifndef SLR_RUN_TOML_H_
#define SLR_RUN_TOML_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace slr {

using Json = nlohmann::ordered_json;

class TomlError : public std::runtime_error {
 public:
  TomlError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// The subset of TOML the run configs use:
//   # comments, [table] and [dotted.table] headers, bare keys,
//   "basic strings" with \" \\ \n \t escapes, integers, floats (incl. inf
//   and nan), true/false, and arrays of those, which may span lines.
// Inline tables, dates, literal strings and dotted keys are not supported.
// Keys keep file order. Throws TomlError.
Json ParseToml(std::string_view text);

// One value in TOML syntax, as it would appear right of `=`.
Json ParseTomlValue(std::string_view text);

// Top-level scalars first, then each table as a [header] in insertion order.
// Floats are written in shortest round-trip form and always carry a '.' or
// exponent, so they re-read as floats.
std::string WriteToml(const Json& root);

}  // namespace slr

#endif  // SLR_RUN_TOML_H_
