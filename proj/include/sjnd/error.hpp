#pragma once

#include <stdexcept>
#include <string>

namespace sjnd {

// Failure categories; the CLI maps each one to a distinct exit code.
enum class ErrorKind { usage, io, validation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_io(const std::string& what) {
  throw Error(ErrorKind::io, what);
}

[[noreturn]] inline void throw_validation(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}

[[noreturn]] inline void throw_usage(const std::string& what) {
  throw Error(ErrorKind::usage, what);
}

}  // namespace sjnd
