// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtsrnn {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string &detail,
             const std::string &source = {})
      : Error((source.empty() ? "" : source + ": ") +
              (line ? "line " + std::to_string(line) + ": " : "") + detail),
        line_(line), detail_(detail) {}
  std::size_t line() const noexcept { return line_; }
  const std::string &detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// Input that parses but violates a data invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Inconsistent options, e.g. a GRU-D model paired with an imputation method.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Non-finite activation, loss, or gradient.
class NumericError : public Error {
public:
  using Error::Error;
};

} // namespace mtsrnn
