#pragma once

#include <stdexcept>
#include <string>

namespace seasonvol {

enum class ErrorKind {
  Config,          // bad input file, schema or parameter set
  Constraint,      // value violates a domain constraint (e.g. b > a for sinusoidal)
  Domain,          // argument outside the operation's domain (e.g. horizon past maturity)
  Contract,        // caller broke a precondition (non-nested reports, ṽ0 > v0, ...)
  Numerical,       // solver / quadrature / factorization failure
  NonConvergence,  // optimizer could not make progress
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace seasonvol
