#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace seasonvol {

/// Shape of the seasonal mean-reversion level θ(t). All patterns have
/// period one year; Constant is the non-seasonal model (θ ≡ a).
enum class Pattern { Sinusoidal, ExpSinusoidal, Sawtooth, Triangle, Spiked, Constant };

std::string_view to_string(Pattern p) noexcept;
/// Accepts the lower-case names used in config files ("sinusoidal",
/// "exp-sinusoidal", "sawtooth", "triangle", "spiked", "constant").
Pattern parse_pattern(std::string_view name);

/// θ(t) parameters: level a, seasonal magnitude b, peak phase t0 ∈ [0, 1).
struct SeasonalitySpec {
  Pattern pattern = Pattern::Constant;
  double a = 0.0;
  double b = 0.0;
  double t0 = 0.0;

  friend bool operator==(const SeasonalitySpec&, const SeasonalitySpec&) = default;
};

/// Throws Error(Constraint) if the spec violates the pattern's admissible set
/// (sinusoidal: a >= b > 0; other seasonal patterns: a, b > 0; constant: a > 0;
/// t0 ∈ [0, 1)).
void validate(const SeasonalitySpec& spec);

/// Same admissibility check as validate(), but b = 0 is also accepted
/// (degenerate seasonal spec, numerically identical to Constant).
void validate_relaxed(const SeasonalitySpec& spec);

double eval_theta(const SeasonalitySpec& spec, double t);

/// Infimum / supremum of θ over one period.
double theta_min(const SeasonalitySpec& spec);
double theta_max(const SeasonalitySpec& spec);

/// θ̂_T(λ) = ∫_0^T θ(t) e^{λt} dt.
///
/// Sinusoidal and triangle use their closed forms, sawtooth a per-period
/// closed form, constant a·expm1(λT)/λ. Exp-sinusoidal and spiked have no
/// closed form and are integrated with Gauss–Legendre panels aligned to the
/// half-period points t0 + j/2.
double transform_theta(const SeasonalitySpec& spec, double T, double lambda);

/// Points in (lo, hi) where θ may fail to be smooth (t0 + j/2, j ∈ ℤ).
/// Empty for Constant.
std::vector<double> breakpoints(const SeasonalitySpec& spec, double lo, double hi);

/// Points in (lo, hi) where θ jumps (sawtooth only: t0 + k).
std::vector<double> discontinuities(const SeasonalitySpec& spec, double lo, double hi);

namespace detail {
/// θ(t) without validating the spec (hot loops validate once up front).
double theta_unchecked(const SeasonalitySpec& spec, double t);
/// ∫_0^x e^{λs} ds and ∫_0^x s e^{λs} ds without cancellation for small λx.
double exp_moment0(double x, double lambda);
double exp_moment1(double x, double lambda);
/// Triangle transform exactly as the printed closed form (valid for λ ≠ 0).
double triangle_transform_closed(const SeasonalitySpec& spec, double T, double lambda);
/// Per-period closed form for the piecewise-linear patterns (any λ).
double piecewise_linear_transform(const SeasonalitySpec& spec, double T, double lambda);
}  // namespace detail

}  // namespace seasonvol
