// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace sdelab {

struct SingularPoint : std::runtime_error {
  explicit SingularPoint(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct QuadratureBudgetExceeded : std::runtime_error {
  explicit QuadratureBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct DeltaAtOrAboveCritical : std::domain_error {
  explicit DeltaAtOrAboveCritical(const std::string& what) : std::domain_error(what) {}
};

struct UnsupportedDimension : std::domain_error {
  explicit UnsupportedDimension(const std::string& what) : std::domain_error(what) {}
};

struct UnsupportedN : std::domain_error {
  explicit UnsupportedN(const std::string& what) : std::domain_error(what) {}
};

struct ConfigInvalid : std::invalid_argument {
  explicit ConfigInvalid(const std::string& what) : std::invalid_argument(what) {}
};

// Config text could not be parsed at all; carries the offending location.
struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(int line_, int col_, const std::string& what)
      : std::runtime_error("parse error at line " + std::to_string(line_) + ", column " +
                           std::to_string(col_) + ": " + what),
        line(line_),
        column(col_) {}
};

// A config parsed fine but violates a precondition of the requested run.
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace sdelab
