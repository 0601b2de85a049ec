#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treearch {

enum class ErrorKind {
  MalformedLine,
  SelfLoop,
  DuplicateEdge,
  NotATree,
  UnknownLabel,
  NotAPermutation,
  Inconsistent,
  InitialNotConnected,
  InitialNotSubtree,
  EmptyBoundary,
  TooLarge,
  DegenerateWeights,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every error raised by the library carries the module it came from and a
// machine-checkable kind; what() reads "module: Kind: detail".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

  // Numerical failures (as opposed to bad input data).
  bool is_numerical() const noexcept { return kind_ == ErrorKind::DegenerateWeights; }

 private:
  ErrorKind kind_;
  std::string module_;
};

// Raised by is_consistent; carries the first offending position.
class InconsistentHistory : public Error {
 public:
  InconsistentHistory(std::size_t position, const std::string& detail);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace treearch
