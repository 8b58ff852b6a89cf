#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lem {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input: recipe strings, tag files, flag values.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Binary or JSONL file does not match its documented layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Word/token/row bookkeeping disagrees between two inputs.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lem
