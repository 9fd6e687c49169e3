#include "seasonvol/model.hpp"

#include <cmath>
#include <sstream>

#include "seasonvol/errors.hpp"

namespace seasonvol {

void validate(const FactorParams& p) {
  auto bad = [](const std::string& why) { fail(ErrorKind::Constraint, "factor parameters: " + why); };
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) bad("requires kappa > 0");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) bad("requires sigma > 0");
  if (!(p.v0 > 0.0) || !std::isfinite(p.v0)) bad("requires v0 > 0");
  if (!(p.rho > -1.0 && p.rho < 1.0)) bad("requires -1 < rho < 1");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) bad("requires lambda >= 0");
  if (!std::isfinite(p.pi_F) || !std::isfinite(p.pi_v)) bad("market prices of risk must be finite");
  validate_relaxed(p.season);
}

bool feller_ok(const FactorParams& p) { return p.sigma * p.sigma < 2.0 * p.kappa * theta_min(p.season); }

void validate(const ModelParams& p) {
  require(!p.factors.empty(), ErrorKind::Constraint, "model parameters: at least one factor required");
  for (const auto& f : p.factors) validate(f);
  for (std::size_t i = 0; i < p.h.size(); ++i) {
    if (!(p.h[i] > 0.0) || !std::isfinite(p.h[i])) {
      std::ostringstream os;
      os << "measurement error h_" << (i + 1) << " must be > 0 (got " << p.h[i] << ")";
      fail(ErrorKind::Config, os.str());
    }
  }
}

}  // namespace seasonvol
