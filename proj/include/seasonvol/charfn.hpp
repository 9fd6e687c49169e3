#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "seasonvol/model.hpp"

namespace seasonvol {

using cplx = std::complex<double>;

struct CfOptions {
  std::size_t ode_steps = 2048;  // uniform RK4 steps on [0, T]
};

/// Numerical solution of the per-factor Riccati pair for one argument (u1, u2).
struct FactorOde {
  std::vector<double> t;  // uniform grid 0 = t_0 < ... < t_N = T
  std::vector<cplx> A;    // A(t_n, T)
  cplx B0;                // B(0, T)
  cplx f1_0;              // f_1(u, 0)
  double theta_hat = 0.0; // ∫_0^T θ(t) e^{λt} dt
};

/// θ̂_T(λ) through a process-wide cache keyed on (spec, T, λ). Safe for
/// concurrent use.
double cached_transform(const SeasonalitySpec& spec, double T, double lambda);
void clear_transform_cache();
std::size_t transform_cache_size();

/// Joint characteristic function of the log-returns X_m = ln F(T,T_m) - ln F(0,T_m)
/// for fixed (params, T, T1, T2). Everything that does not depend on u is
/// precomputed, so repeated evaluation (Fourier pricing) is cheap.
class CfEngine {
 public:
  CfEngine(std::vector<FactorParams> factors, double T, double T1, double T2, CfOptions opt = {});

  /// E[exp(i(u1 X1 + u2 X2))].
  cplx operator()(cplx u1, cplx u2) const;
  /// ln of the above (principal branch of each factor's exponent, summed).
  cplx log_cf(cplx u1, cplx u2) const;

  /// Full per-factor solution, for diagnostics and tests.
  FactorOde solve(std::size_t factor, cplx u1, cplx u2) const;

  double T() const { return T_; }
  double T1() const { return T1_; }
  double T2() const { return T2_; }
  std::size_t n_factors() const { return plans_.size(); }

 private:
  struct Plan {
    FactorParams p;
    double theta_hat = 0.0;
    // Per grid cell n: ∫ κθ(t) H_i(t) dt against the cubic Hermite basis
    // (value left, slope left, value right, slope right).
    std::vector<double> w0, w1, w2, w3;
  };

  void solve_A(const Plan& pl, cplx u1, cplx u2, std::vector<cplx>& A, std::vector<cplx>& dA) const;
  cplx factor_exponent(const Plan& pl, cplx u1, cplx u2, FactorOde* out) const;

  std::vector<Plan> plans_;
  double T_, T1_, T2_;
  std::size_t steps_;
};

/// φ(u1, u2; T, T1, T2). Throws Error(Numerical) on a non-finite result or
/// |φ| > 1 + 1e-8 for real arguments.
cplx joint_cf(std::span<const FactorParams> factors, cplx u1, cplx u2, double T, double T1, double T2,
              const CfOptions& opt = {});

/// φ(u, 0); with `F0` given returns Φ(u) = exp(iu ln F0)·φ(u).
cplx single_cf(std::span<const FactorParams> factors, cplx u, double T, double T1,
               std::optional<double> F0 = std::nullopt, const CfOptions& opt = {});

/// Max over the grid of |dA/dt - (κA - σ²A²/2 - q)|, with dA/dt from
/// five-point finite differences of the RK4 solution.
double riccati_residual(const FactorParams& p, cplx u1, cplx u2, double T, double T1, double T2,
                        const CfOptions& opt = {});

/// B(0, T) by co-integrating (A, B) with RK4 on a grid cut at θ's kinks,
/// independent of the quadrature route used by CfEngine.
cplx b_by_ode(const FactorParams& p, cplx u1, cplx u2, double T, double T1, double T2,
              const CfOptions& opt = {});

}  // namespace seasonvol
