#include "seasonvol/seasonality.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "seasonvol/errors.hpp"
#include "seasonvol/quadrature.hpp"

namespace seasonvol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) { return x - std::floor(x); }

// expm1(z)/z, 1 at z = 0.
double exprel(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// ∫_{x0}^{x1} (c0 + c1 s) e^{λs} ds, evaluated relative to x0 to avoid
// subtracting two large antiderivatives.
double linear_piece(double c0, double c1, double x0, double x1, double lambda) {
  if (x1 <= x0) return 0.0;
  const double len = x1 - x0;
  return std::exp(lambda * x0) *
         ((c0 + c1 * x0) * detail::exp_moment0(len, lambda) + c1 * detail::exp_moment1(len, lambda));
}

struct LinearPiece {
  double lo, hi, c0, c1;
};

// One-period profile g on [0, 1] such that θ(t) = a + b·g(frac(t − t0)).
std::vector<LinearPiece> profile(Pattern p) {
  switch (p) {
    case Pattern::Sawtooth: return {{0.0, 1.0, 0.0, 1.0}};
    case Pattern::Triangle: return {{0.0, 0.5, 0.5, -1.0}, {0.5, 1.0, -0.5, 1.0}};
    default: fail(ErrorKind::Contract, "piecewise-linear profile requested for a smooth pattern");
  }
}

// ∫_{x0}^{x1} g(s) e^{λs} ds for 0 <= x0 <= x1 <= 1.
double profile_integral(const std::vector<LinearPiece>& g, double x0, double x1, double lambda) {
  double acc = 0.0;
  for (const auto& piece : g) {
    const double lo = std::max(x0, piece.lo);
    const double hi = std::min(x1, piece.hi);
    acc += linear_piece(piece.c0, piece.c1, lo, hi, lambda);
  }
  return acc;
}

// Σ_{k=0}^{n-1} e^{λk}
double geometric(long n, double lambda) {
  if (n <= 0) return 0.0;
  if (lambda == 0.0) return static_cast<double>(n);
  return std::expm1(lambda * static_cast<double>(n)) / std::expm1(lambda);
}

double constant_transform(double a, double T, double lambda) { return a * T * exprel(lambda * T); }

double sinusoidal_transform(const SeasonalitySpec& s, double T, double lambda) {
  const double denom = lambda * lambda + kTwoPi * kTwoPi;
  const double phase_T = kTwoPi * (T - s.t0);
  const double phase_0 = kTwoPi * s.t0;
  return s.b * std::exp(lambda * T) / denom * (kTwoPi * std::sin(phase_T) + lambda * std::cos(phase_T)) +
         s.b / denom * (kTwoPi * std::sin(phase_0) - lambda * std::cos(phase_0)) +
         constant_transform(s.a, T, lambda);
}

double numeric_transform(const SeasonalitySpec& s, double T, double lambda) {
  const auto cuts = breakpoints(s, 0.0, T);
  return quad::integrate([&](double t) { return detail::theta_unchecked(s, t) * std::exp(lambda * t); }, 0.0, T,
                         cuts, 2, 24);
}

// Below this |λ| the printed triangle closed form loses digits to its 1/λ² terms.
constexpr double kTriangleSmallLambda = 0.05;

}  // namespace

std::string_view to_string(Pattern p) noexcept {
  switch (p) {
    case Pattern::Sinusoidal: return "sinusoidal";
    case Pattern::ExpSinusoidal: return "exp-sinusoidal";
    case Pattern::Sawtooth: return "sawtooth";
    case Pattern::Triangle: return "triangle";
    case Pattern::Spiked: return "spiked";
    case Pattern::Constant: return "constant";
  }
  return "unknown";
}

Pattern parse_pattern(std::string_view name) {
  for (Pattern p : {Pattern::Sinusoidal, Pattern::ExpSinusoidal, Pattern::Sawtooth, Pattern::Triangle,
                    Pattern::Spiked, Pattern::Constant})
    if (name == to_string(p)) return p;
  if (name == "exp_sinusoidal" || name == "expsinusoidal") return Pattern::ExpSinusoidal;
  if (name == "non-seasonal" || name == "nonseasonal") return Pattern::Constant;
  fail(ErrorKind::Config, "unknown seasonality pattern '" + std::string(name) + "'");
}

namespace {
void validate_impl(const SeasonalitySpec& s, bool allow_zero_b) {
  auto bad = [&](const std::string& why) {
    std::ostringstream os;
    os << to_string(s.pattern) << " seasonality (a=" << s.a << ", b=" << s.b << ", t0=" << s.t0
       << "): " << why;
    fail(ErrorKind::Constraint, os.str());
  };
  if (!std::isfinite(s.a) || !std::isfinite(s.b) || !std::isfinite(s.t0)) bad("non-finite parameter");
  if (!(s.a > 0.0)) bad("requires a > 0");
  if (s.pattern == Pattern::Constant) return;
  if (!(s.t0 >= 0.0 && s.t0 < 1.0)) bad("requires t0 in [0, 1)");
  if (allow_zero_b ? s.b < 0.0 : !(s.b > 0.0)) bad(allow_zero_b ? "requires b >= 0" : "requires b > 0");
  if (s.pattern == Pattern::Sinusoidal && s.b > s.a) bad("requires a >= b");
}
}  // namespace

void validate(const SeasonalitySpec& s) { validate_impl(s, false); }
void validate_relaxed(const SeasonalitySpec& s) { validate_impl(s, true); }

double eval_theta(const SeasonalitySpec& s, double t) {
  validate_relaxed(s);
  require(t >= 0.0, ErrorKind::Domain, "eval_theta: t must be >= 0");
  return detail::theta_unchecked(s, t);
}

double detail::theta_unchecked(const SeasonalitySpec& s, double t) {
  switch (s.pattern) {
    case Pattern::Sinusoidal: return s.a + s.b * std::cos(kTwoPi * (t - s.t0));
    case Pattern::ExpSinusoidal: return s.a * std::exp(s.b * std::cos(kTwoPi * (t - s.t0)));
    case Pattern::Sawtooth: return s.a + s.b * frac(t - s.t0);
    case Pattern::Triangle: return s.a + s.b * std::abs(0.5 - frac(t - s.t0));
    case Pattern::Spiked: {
      const double inner = 2.0 / (1.0 + std::abs(std::sin(std::numbers::pi * (t - s.t0)))) - 1.0;
      return s.a + s.b * inner * inner;
    }
    case Pattern::Constant: return s.a;
  }
  return s.a;
}

double theta_min(const SeasonalitySpec& s) {
  switch (s.pattern) {
    case Pattern::Sinusoidal: return s.a - s.b;
    case Pattern::ExpSinusoidal: return s.a * std::exp(-s.b);
    default: return s.a;
  }
}

double theta_max(const SeasonalitySpec& s) {
  switch (s.pattern) {
    case Pattern::Sinusoidal: return s.a + s.b;
    case Pattern::ExpSinusoidal: return s.a * std::exp(s.b);
    case Pattern::Triangle: return s.a + 0.5 * s.b;
    case Pattern::Sawtooth:
    case Pattern::Spiked: return s.a + s.b;
    case Pattern::Constant: return s.a;
  }
  return s.a;
}

std::vector<double> breakpoints(const SeasonalitySpec& s, double lo, double hi) {
  std::vector<double> out;
  if (s.pattern == Pattern::Constant || !(hi > lo)) return out;
  for (double j = std::floor(2.0 * (lo - s.t0)); s.t0 + 0.5 * j < hi; j += 1.0) {
    const double p = s.t0 + 0.5 * j;
    if (p > lo) out.push_back(p);
  }
  return out;
}

std::vector<double> discontinuities(const SeasonalitySpec& s, double lo, double hi) {
  std::vector<double> out;
  if (s.pattern != Pattern::Sawtooth || !(hi > lo)) return out;
  for (double k = std::floor(lo - s.t0); s.t0 + k < hi; k += 1.0) {
    const double p = s.t0 + k;
    if (p > lo) out.push_back(p);
  }
  return out;
}

namespace detail {

double exp_moment0(double x, double lambda) { return x * exprel(lambda * x); }

double exp_moment1(double x, double lambda) {
  // x² ∫_0^1 r e^{zr} dr with z = λx.
  const double z = lambda * x;
  double g;
  if (std::abs(z) < 0.5) {
    // Σ z^m / (m! (m + 2))
    double term = 1.0;  // z^m / m!
    g = 0.5;
    for (int m = 1; m < 40; ++m) {
      term *= z / m;
      const double inc = term / (m + 2);
      g += inc;
      if (std::abs(inc) < 1e-18 * std::abs(g)) break;
    }
  } else {
    g = (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
  }
  return x * x * g;
}

double piecewise_linear_transform(const SeasonalitySpec& s, double T, double lambda) {
  const auto g = profile(s.pattern);
  // Partial period [0, min(T, t0)): frac(t − t0) = t − t0 + 1.
  const double m = std::min(T, s.t0);
  double seasonal = 0.0;
  if (m > 0.0) {
    const double start = 1.0 - s.t0;
    seasonal += std::exp(lambda * (s.t0 - 1.0)) * profile_integral(g, start, start + m, lambda);
  }
  if (T >= s.t0) {
    const double span = T - s.t0;
    const long n = static_cast<long>(std::floor(span));
    const double alpha = span - static_cast<double>(n);
    seasonal += std::exp(lambda * s.t0) * profile_integral(g, 0.0, 1.0, lambda) * geometric(n, lambda);
    seasonal += std::exp(lambda * (s.t0 + static_cast<double>(n))) * profile_integral(g, 0.0, alpha, lambda);
  }
  return constant_transform(s.a, T, lambda) + s.b * seasonal;
}

double triangle_transform_closed(const SeasonalitySpec& s, double T, double lambda) {
  const double l = lambda;
  const double t0 = s.t0;
  const double span = T - t0;
  const long n = static_cast<long>(std::floor(span));
  const double alpha = span - static_cast<double>(n);
  const double z1 = 0.5 + 1.0 / l;
  const double z2 = 0.5 - 1.0 / l;
  const double z3 = z1 - alpha;
  auto ind = [](bool c) { return c ? 1.0 : 0.0; };
  const double sum_n = geometric(n, l);  // Σ_{k=0}^{n-1} e^{λk}, zero when n <= 0

  double br = z2 + (2.0 / l * std::exp(-l / 2.0) + std::exp(-l * t0) * (z2 - t0)) * ind(t0 > 0.5) -
              std::exp(-l * t0) * (z2 - t0) * ind(t0 <= 0.5);
  br += ((2.0 / l * std::exp(l / 2.0) + z2 * std::exp(l) - z1) * sum_n +
         std::exp(l * static_cast<double>(n)) *
             ((2.0 / l * std::exp(l / 2.0) - z3 * std::exp(l * alpha)) * ind(alpha > 0.5) +
              z3 * std::exp(l * alpha) * ind(alpha <= 0.5) - z1)) *
        ind(T >= t0);
  br += (std::exp(l * span) * (z2 + span) - z2) * ind(span >= -0.5 && span < 0.0);
  br -= (2.0 / l * std::exp(-l / 2.0) + std::exp(l * span) * (z2 + span) + z2) *
        ind(span >= -1.0 && span < -0.5);
  return s.a / l * std::expm1(l * T) + s.b * std::exp(l * t0) / l * br;
}

}  // namespace detail

double transform_theta(const SeasonalitySpec& s, double T, double lambda) {
  validate_relaxed(s);
  require(T >= 0.0 && std::isfinite(T), ErrorKind::Domain, "transform_theta: T must be >= 0");
  require(std::isfinite(lambda), ErrorKind::Domain, "transform_theta: lambda must be finite");
  if (T == 0.0) return 0.0;
  switch (s.pattern) {
    case Pattern::Constant: return constant_transform(s.a, T, lambda);
    case Pattern::Sinusoidal: return sinusoidal_transform(s, T, lambda);
    case Pattern::Sawtooth: return detail::piecewise_linear_transform(s, T, lambda);
    case Pattern::Triangle:
      return std::abs(lambda) < kTriangleSmallLambda ? detail::piecewise_linear_transform(s, T, lambda)
                                                     : detail::triangle_transform_closed(s, T, lambda);
    case Pattern::ExpSinusoidal:
    case Pattern::Spiked: return numeric_transform(s, T, lambda);
  }
  return 0.0;
}

}  // namespace seasonvol
