#pragma once

#include <stdexcept>
#include <string>

namespace linkemu {

// Misuse of an API contract (time going backwards, scheduling in the past).
class ProgrammingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A well-formed description that cannot be instantiated (e.g. no route between flow endpoints).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
  syntax,
  unknown_key,
  missing_field,
  type_mismatch,
  invalid_value,
  duplicate_id,
  missing_reference,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  // `where` is either "line L, column C" (syntax) or a document path such as "links[0].forward".
  ParseError(ParseErrorKind kind, std::string where, const std::string& message, int line = 0,
             int column = 0);

  [[nodiscard]] ParseErrorKind kind() const { return kind_; }
  [[nodiscard]] const std::string& where() const { return where_; }
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  ParseErrorKind kind_;
  std::string where_;
  int line_;
  int column_;
};

}  // namespace linkemu
