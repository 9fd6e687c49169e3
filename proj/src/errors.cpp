#include "seasonvol/errors.hpp"

namespace seasonvol {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Constraint: return "constraint";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::NonConvergence: return "nonconvergence";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace seasonvol
