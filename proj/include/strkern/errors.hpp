#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strkern {

/// Base of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (shape, id alignment, bad n, ...).
class argument_error : public error {
 public:
  using error::error;
};

/// Malformed input file. Carries the 1-based line number when known.
class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t line = 0)
      : error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that breaks a data invariant (duplicate id, ...).
class validation_error : public error {
 public:
  using error::error;
};

/// Training sources overlap evaluation sources.
class cross_source_violation : public validation_error {
 public:
  using validation_error::validation_error;
};

/// Binary or text artifact with an unknown magic / version.
class format_error : public error {
 public:
  using error::error;
};

/// Solver breakdown, NaN scores and similar.
class numerical_error : public error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit numerical_error(const std::string& what, std::size_t pivot = npos)
      : error(what), pivot_(pivot) {}
  /// Index of the failing pivot for factorization errors, npos otherwise.
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Invalid experiment configuration.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace strkern
