#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankone {

enum class ErrorKind {
  validation,
  resource_guard,
  search_exhausted,
  escape,
  convergence,
};

// Process exit code associated with an error kind (0 is success).
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class ResourceGuardError : public Error {
 public:
  explicit ResourceGuardError(const std::string& what) : Error(ErrorKind::resource_guard, what) {}
};

class SearchExhaustedError : public Error {
 public:
  explicit SearchExhaustedError(const std::string& what) : Error(ErrorKind::search_exhausted, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

// An A-orbit left the tower; index is the 1-based position of the first
// sampled term that falls outside.
class EscapeError : public Error {
 public:
  explicit EscapeError(std::size_t index)
      : Error(ErrorKind::escape, "orbit escapes the tower at sampled index " + std::to_string(index)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace rankone
