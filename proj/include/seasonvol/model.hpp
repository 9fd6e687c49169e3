#pragma once

#include <vector>

#include "seasonvol/seasonality.hpp"

namespace seasonvol {

/// One volatility factor: futures loading e^{-λ(T_m - t)}·√v, CIR variance
/// with seasonal level θ(t), plus market prices of risk linking ℚ and ℙ.
struct FactorParams {
  double lambda = 0.0;  // Samuelson damping, 1/year
  double kappa = 1.0;   // variance mean-reversion speed
  double sigma = 0.1;   // vol-of-vol
  double rho = 0.0;     // futures/variance shock correlation
  double v0 = 0.04;     // initial variance
  SeasonalitySpec season{Pattern::Constant, 0.04, 0.0, 0.0};
  double pi_F = 0.0;  // market price of futures-price risk
  double pi_v = 0.0;  // market price of volatility risk

  friend bool operator==(const FactorParams&, const FactorParams&) = default;
};

/// Throws Error(Constraint) unless κ, σ, v0 > 0, |ρ| < 1, λ >= 0 and the
/// seasonality spec is admissible (b = 0 tolerated).
void validate(const FactorParams& p);

/// σ² < 2κ·θ_min: the variance stays strictly positive.
bool feller_ok(const FactorParams& p);

/// Full parameter set: factors plus one measurement-error standard
/// deviation h_i per contract slot (H = diag(h_i²)).
struct ModelParams {
  std::vector<FactorParams> factors;
  std::vector<double> h;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

void validate(const ModelParams& p);

}  // namespace seasonvol
