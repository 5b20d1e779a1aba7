#pragma once

#include <stdexcept>
#include <string>

namespace rulkit {

// Error categories map to CLI exit codes: config=2, io=3, numeric=4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures carry file and line context.
class ParseError : public IoError {
 public:
  ParseError(const std::string& file, long line, const std::string& msg)
      : IoError(file + ":" + std::to_string(line) + ": " + msg),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  long line() const { return line_; }

 private:
  std::string file_;
  long line_;
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rulkit
