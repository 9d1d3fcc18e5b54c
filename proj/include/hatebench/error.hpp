#pragma once

#include <stdexcept>
#include <string>

namespace hatebench {

// Each family maps onto a distinct CLI exit code.
enum class ErrorKind { Config = 2, Data = 3, Training = 4, Io = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error(ErrorKind::Training, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Throws the subclass matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::Config: throw ConfigError(what);
    case ErrorKind::Data: throw DataError(what);
    case ErrorKind::Training: throw TrainingError(what);
    case ErrorKind::Io: break;
  }
  throw IoError(what);
}

}  // namespace hatebench
