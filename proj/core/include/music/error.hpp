#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace music {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what,
             const std::string& source = {})
      : Error((source.empty() ? std::string{} : source + ": ") + "line " +
              std::to_string(line) + ": " + what),
        line_(line),
        detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// An iterate left the finite range (or exceeded the norm guard).
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t iteration)
      : Error("iterate diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace music
