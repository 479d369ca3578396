#pragma once

#include <stdexcept>
#include <string>

namespace semcom {

enum class ErrorKind {
  Domain,           // argument outside the mathematical domain of an operation
  Shape,            // mismatched vector or matrix dimensions
  Validation,       // configuration or structural invariant violated
  Parse,            // malformed config or checkpoint text
  Constraint,       // masked action or infeasible assignment submitted
  Divergence,       // non-finite objective or gradient during training
  CapExceeded,      // enumeration larger than the configured cap
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace semcom
