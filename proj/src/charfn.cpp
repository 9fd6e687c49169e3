#include "seasonvol/charfn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "seasonvol/errors.hpp"
#include "seasonvol/quadrature.hpp"

namespace seasonvol {

namespace {

struct CacheKey {
  Pattern pattern;
  double a, b, t0, T, lambda;
  bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const noexcept {
    std::uint64_t h = 14695981039346656037ULL ^ static_cast<std::uint64_t>(k.pattern);
    for (double x : {k.a, k.b, k.t0, k.T, k.lambda}) {
      h ^= std::bit_cast<std::uint64_t>(x);
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr std::size_t kCacheLimit = 1 << 16;

std::shared_mutex cache_mutex;
std::unordered_map<CacheKey, double, CacheKeyHash> cache;

constexpr cplx I{0.0, 1.0};

struct Loadings {
  double e1, e2;  // e^{-λ(T1 - t)}, e^{-λ(T2 - t)} at t = 0
  double lambda;
};

inline void f12(const Loadings& L, cplx u1, cplx u2, double t, cplx& f1, cplx& f2) {
  const double g1 = L.e1 * std::exp(L.lambda * t);
  const double g2 = L.e2 * std::exp(L.lambda * t);
  f1 = u1 * g1 + u2 * g2;
  f2 = u1 * (g1 * g1) + u2 * (g2 * g2);
}

inline cplx q_of(const FactorParams& p, cplx f1, cplx f2) {
  return I * (p.rho * (p.kappa - p.lambda) / p.sigma) * f1 - 0.5 * (1.0 - p.rho * p.rho) * f1 * f1 -
         0.5 * I * f2;
}

inline cplx riccati_rhs(const FactorParams& p, const Loadings& L, cplx u1, cplx u2, double t, cplx A) {
  cplx f1, f2;
  f12(L, u1, u2, t, f1, f2);
  return p.kappa * A - 0.5 * p.sigma * p.sigma * A * A - q_of(p, f1, f2);
}

Loadings loadings(const FactorParams& p, double T1, double T2) {
  return {std::exp(-p.lambda * T1), std::exp(-p.lambda * T2), p.lambda};
}

void check_times(double T, double T1, double T2) {
  require(std::isfinite(T) && T >= 0.0, ErrorKind::Domain, "characteristic function: requires T >= 0");
  require(T <= T1 + 1e-12 && T <= T2 + 1e-12, ErrorKind::Domain,
          "characteristic function: requires T <= min(T1, T2)");
}

}  // namespace

double cached_transform(const SeasonalitySpec& spec, double T, double lambda) {
  const CacheKey key{spec.pattern, spec.a, spec.b, spec.t0, T, lambda};
  {
    std::shared_lock lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double value = transform_theta(spec, T, lambda);
  std::unique_lock lock(cache_mutex);
  if (cache.size() >= kCacheLimit) cache.clear();
  cache.emplace(key, value);
  return value;
}

void clear_transform_cache() {
  std::unique_lock lock(cache_mutex);
  cache.clear();
}

std::size_t transform_cache_size() {
  std::shared_lock lock(cache_mutex);
  return cache.size();
}

CfEngine::CfEngine(std::vector<FactorParams> factors, double T, double T1, double T2, CfOptions opt)
    : T_(T), T1_(T1), T2_(T2), steps_(opt.ode_steps) {
  require(!factors.empty(), ErrorKind::Domain, "characteristic function: at least one factor required");
  require(steps_ >= 4, ErrorKind::Domain, "characteristic function: ode_steps must be >= 4");
  check_times(T, T1, T2);
  const auto& gl = quad::gauss_legendre(6);
  const double h = T / static_cast<double>(steps_);
  for (auto& f : factors) {
    validate(f);
    Plan pl;
    pl.p = f;
    pl.theta_hat = T > 0.0 ? cached_transform(f.season, T, f.lambda) : 0.0;
    if (T > 0.0) {
      const auto kinks = breakpoints(f.season, 0.0, T);
      pl.w0.assign(steps_, 0.0);
      pl.w1.assign(steps_, 0.0);
      pl.w2.assign(steps_, 0.0);
      pl.w3.assign(steps_, 0.0);
      auto kink = kinks.begin();
      std::vector<double> cuts;
      for (std::size_t n = 0; n < steps_; ++n) {
        const double lo = T * static_cast<double>(n) / static_cast<double>(steps_);
        const double hi = T * static_cast<double>(n + 1) / static_cast<double>(steps_);
        cuts.assign(1, lo);
        while (kink != kinks.end() && *kink <= lo) ++kink;
        for (auto k = kink; k != kinks.end() && *k < hi; ++k) cuts.push_back(*k);
        cuts.push_back(hi);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
          const double a = cuts[c], b = cuts[c + 1];
          const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
          for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double t = mid + half * gl.nodes[i];
            const double s = (t - lo) / h;
            const double w = half * gl.weights[i] * f.kappa * detail::theta_unchecked(f.season, t);
            const double s2 = s * s, s3 = s2 * s;
            pl.w0[n] += w * (2.0 * s3 - 3.0 * s2 + 1.0);
            pl.w1[n] += w * h * (s3 - 2.0 * s2 + s);
            pl.w2[n] += w * (-2.0 * s3 + 3.0 * s2);
            pl.w3[n] += w * h * (s3 - s2);
          }
        }
      }
    }
    plans_.push_back(std::move(pl));
  }
}

void CfEngine::solve_A(const Plan& pl, cplx u1, cplx u2, std::vector<cplx>& A, std::vector<cplx>& dA) const {
  const FactorParams& p = pl.p;
  const Loadings L = loadings(p, T1_, T2_);
  const std::size_t N = steps_;
  const double h = T_ / static_cast<double>(N);
  A.assign(N + 1, cplx{});
  dA.assign(N + 1, cplx{});
  cplx f1T, f2T;
  f12(L, u1, u2, T_, f1T, f2T);
  A[N] = I * (p.rho / p.sigma) * f1T;
  for (std::size_t n = N; n-- > 0;) {
    const double t = T_ * static_cast<double>(n + 1) / static_cast<double>(N);
    const cplx y = A[n + 1];
    const cplx k1 = riccati_rhs(p, L, u1, u2, t, y);
    const cplx k2 = riccati_rhs(p, L, u1, u2, t - 0.5 * h, y - 0.5 * h * k1);
    const cplx k3 = riccati_rhs(p, L, u1, u2, t - 0.5 * h, y - 0.5 * h * k2);
    const cplx k4 = riccati_rhs(p, L, u1, u2, t - h, y - h * k3);
    A[n] = y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(A[n].real()) || !std::isfinite(A[n].imag()))
      fail(ErrorKind::Numerical, "characteristic function: Riccati solution diverged");
  }
  for (std::size_t n = 0; n <= N; ++n)
    dA[n] = riccati_rhs(p, L, u1, u2, T_ * static_cast<double>(n) / static_cast<double>(N), A[n]);
}

cplx CfEngine::factor_exponent(const Plan& pl, cplx u1, cplx u2, FactorOde* out) const {
  const FactorParams& p = pl.p;
  const Loadings L = loadings(p, T1_, T2_);
  cplx f1_0, f2_0;
  f12(L, u1, u2, 0.0, f1_0, f2_0);
  if (T_ == 0.0) {
    if (out) {
      out->t = {0.0};
      out->A = {I * (p.rho / p.sigma) * f1_0};
      out->B0 = 0.0;
      out->f1_0 = f1_0;
      out->theta_hat = 0.0;
    }
    return 0.0;
  }
  std::vector<cplx> A, dA;
  solve_A(pl, u1, u2, A, dA);
  cplx B0 = 0.0;
  for (std::size_t n = 0; n < steps_; ++n)
    B0 += pl.w0[n] * A[n] + pl.w1[n] * dA[n] + pl.w2[n] * A[n + 1] + pl.w3[n] * dA[n + 1];
  const cplx expo = -I * (p.rho / p.sigma) * f1_0 * (p.v0 + p.kappa * pl.theta_hat) + A[0] * p.v0 + B0;
  if (out) {
    out->t.resize(steps_ + 1);
    for (std::size_t n = 0; n <= steps_; ++n)
      out->t[n] = T_ * static_cast<double>(n) / static_cast<double>(steps_);
    out->A = std::move(A);
    out->B0 = B0;
    out->f1_0 = f1_0;
    out->theta_hat = pl.theta_hat;
  }
  return expo;
}

cplx CfEngine::log_cf(cplx u1, cplx u2) const {
  cplx sum = 0.0;
  for (const auto& pl : plans_) sum += factor_exponent(pl, u1, u2, nullptr);
  return sum;
}

cplx CfEngine::operator()(cplx u1, cplx u2) const { return std::exp(log_cf(u1, u2)); }

FactorOde CfEngine::solve(std::size_t factor, cplx u1, cplx u2) const {
  require(factor < plans_.size(), ErrorKind::Domain, "characteristic function: factor index out of range");
  FactorOde out;
  factor_exponent(plans_[factor], u1, u2, &out);
  return out;
}

cplx joint_cf(std::span<const FactorParams> factors, cplx u1, cplx u2, double T, double T1, double T2,
              const CfOptions& opt) {
  const CfEngine eng({factors.begin(), factors.end()}, T, T1, T2, opt);
  const cplx phi = eng(u1, u2);
  if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag()))
    fail(ErrorKind::Numerical, "characteristic function: non-finite value");
  if (u1.imag() == 0.0 && u2.imag() == 0.0 && std::abs(phi) > 1.0 + 1e-8)
    fail(ErrorKind::Numerical, "characteristic function: |phi| > 1 at a real argument");
  return phi;
}

cplx single_cf(std::span<const FactorParams> factors, cplx u, double T, double T1, std::optional<double> F0,
               const CfOptions& opt) {
  cplx phi = joint_cf(factors, u, 0.0, T, T1, T1, opt);
  if (F0) {
    require(*F0 > 0.0, ErrorKind::Domain, "single_cf: initial futures price must be > 0");
    phi *= std::exp(I * u * std::log(*F0));
  }
  return phi;
}

double riccati_residual(const FactorParams& p, cplx u1, cplx u2, double T, double T1, double T2,
                        const CfOptions& opt) {
  require(T > 0.0, ErrorKind::Domain, "riccati_residual: requires T > 0");
  const CfEngine eng({p}, T, T1, T2, opt);
  const FactorOde ode = eng.solve(0, u1, u2);
  const Loadings L = loadings(p, T1, T2);
  const std::size_t N = ode.A.size() - 1;
  const double h = T / static_cast<double>(N);
  const auto& A = ode.A;
  double worst = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    cplx d;
    if (n >= 2 && n + 2 <= N)
      d = (A[n - 2] - 8.0 * A[n - 1] + 8.0 * A[n + 1] - A[n + 2]) / (12.0 * h);
    else if (n < 2)
      d = (-25.0 * A[n] + 48.0 * A[n + 1] - 36.0 * A[n + 2] + 16.0 * A[n + 3] - 3.0 * A[n + 4]) / (12.0 * h);
    else
      d = (25.0 * A[n] - 48.0 * A[n - 1] + 36.0 * A[n - 2] - 16.0 * A[n - 3] + 3.0 * A[n - 4]) / (12.0 * h);
    worst = std::max(worst, std::abs(d - riccati_rhs(p, L, u1, u2, ode.t[n], A[n])));
  }
  return worst;
}

cplx b_by_ode(const FactorParams& p, cplx u1, cplx u2, double T, double T1, double T2, const CfOptions& opt) {
  validate(p);
  check_times(T, T1, T2);
  if (T == 0.0) return 0.0;
  const Loadings L = loadings(p, T1, T2);
  const auto kinks = breakpoints(p.season, 0.0, T);
  const auto cuts = quad::cut_points(0.0, T, kinks);
  cplx f1T, f2T;
  f12(L, u1, u2, T, f1T, f2T);
  cplx A = I * (p.rho / p.sigma) * f1T;
  cplx B = 0.0;
  auto rhs = [&](double t, double lo, double hi, cplx a, cplx& dA, cplx& dB) {
    const double eps = 1e-13 * std::max(1.0, T);
    const double tc = std::clamp(t, lo + eps, hi - eps);
    dA = riccati_rhs(p, L, u1, u2, t, a);
    dB = -p.kappa * detail::theta_unchecked(p.season, tc) * a;
  };
  for (std::size_t c = cuts.size() - 1; c-- > 0;) {
    const double lo = cuts[c], hi = cuts[c + 1];
    const auto m = static_cast<std::size_t>(
        std::max(1.0, std::ceil((hi - lo) / T * static_cast<double>(opt.ode_steps))));
    const double h = (hi - lo) / static_cast<double>(m);
    for (std::size_t s = m; s-- > 0;) {
      const double t = lo + h * static_cast<double>(s + 1);
      cplx a1, b1, a2, b2, a3, b3, a4, b4;
      rhs(t, lo, hi, A, a1, b1);
      rhs(t - 0.5 * h, lo, hi, A - 0.5 * h * a1, a2, b2);
      rhs(t - 0.5 * h, lo, hi, A - 0.5 * h * a2, a3, b3);
      rhs(t - h, lo, hi, A - h * a3, a4, b4);
      A -= (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
      B -= (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
  }
  return B;
}

}  // namespace seasonvol
