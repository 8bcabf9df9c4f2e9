#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aqp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed pipeline program. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnknownPredicate : public Error {
 public:
  explicit UnknownPredicate(const std::string& name)
      : Error("unknown predicate '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class IncompleteBatch : public Error {
 public:
  using Error::Error;
};

class DuplicateReturn : public Error {
 public:
  using Error::Error;
};

class WarmupPending : public Error {
 public:
  using Error::Error;
};

class UdfError : public Error {
 public:
  using Error::Error;
};

class CacheIoError : public Error {
 public:
  using Error::Error;
};

// Raised when the pipeline makes no progress for the configured timeout.
// what() carries the queue-state dump.
class WatchdogAbort : public Error {
 public:
  using Error::Error;
};

// Config validation failure; path is the dotted field path, e.g. "udfs.breed.cost".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : Error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace aqp
