#pragma once

#include <stdexcept>
#include <string>

namespace factordb {

// Malformed input files (CSV framing, bad headers, ragged rows).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input violating an integrity rule (duplicate identifiers, ...).
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query / expression text that does not parse.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
  size_t position;
};

// Query refers to columns a relation does not have, or a plan does not
// match the query it is applied to.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured resource limit (monomial guard) was exceeded.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace factordb
