#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "seasonvol/charfn.hpp"

namespace seasonvol {

struct VanillaSpec {
  double K = 1.0;
  double T = 1.0;   // option expiry
  double Tm = 1.0;  // futures maturity, >= T
  double r = 0.0;
  bool call = true;
};

struct SpreadSpec {
  double K = 0.0;   // may be zero or negative
  double T = 1.0;
  double T1 = 1.0;
  double T2 = 1.0;
  double r = 0.0;
};

struct PricingOptions {
  CfOptions cf;
  double alpha = 1.25;       // |damping| of the call/put transform
  double cutoff = 1e-12;     // truncate once the transformed integrand stays below this
  double max_u = 500.0;      // give up beyond this frequency, in units of 1/sd(log-return)
  std::size_t order = 16;    // Gauss–Legendre nodes per panel
  // Calendar-spread Monte Carlo fallback.
  std::size_t mc_paths = 200000;
  std::size_t mc_steps = 200;
  std::uint64_t mc_seed = 1;
  unsigned threads = 1;
};

/// European options on one futures contract by damped Fourier inversion in
/// log-moneyness k = ln(K/F0). Strikes with k >= 0 integrate the call
/// transform (damping +alpha), k < 0 the put transform (damping -alpha); the
/// other side follows from C - P = e^{-rT}(F0 - K). Transform values are
/// computed once per damping and shared by every strike.
class VanillaPricer {
 public:
  VanillaPricer(std::vector<FactorParams> factors, double T, double Tm, double F0, double r,
                PricingOptions opt = {});

  double call(double K) const;
  double put(double K) const;
  double price(double K, bool is_call) const { return is_call ? call(K) : put(K); }

 private:
  struct Nodes {
    std::vector<double> u, w;
    std::vector<cplx> psi;  // transformed CF at u
  };
  const Nodes& nodes(int side) const;  // 0: call side (+alpha), 1: put side (-alpha)
  double otm_normalized(double k, int side) const;

  CfEngine engine_;
  double T_, F0_, r_;
  PricingOptions opt_;
  mutable std::once_flag once_[2];
  mutable Nodes nodes_[2];
};

double price_european(const VanillaSpec& spec, std::span<const FactorParams> factors, double F0,
                      const PricingOptions& opt = {});

struct SpreadResult {
  double price = 0.0;
  std::string method;  // "lower-bound", "forward", "vanilla", "monte-carlo"
  double delta = 0.0;  // exercise boundary ln F1 - delta ln F2 > k (lower-bound method)
  double k = 0.0;
  double mc_stderr = 0.0;
};

/// Calendar spread e^{-rT} E[(F(T,T1) - F(T,T2) - K)^+]. The main route is the
/// CF lower bound: the exercise region {ln F1 - δ ln F2 > k} is optimized over
/// (δ, k), each candidate priced by three tilted one-dimensional inversions of
/// the joint CF. Falls back to Monte Carlo if the inversions cannot be
/// truncated or the optimizer produces a non-finite value.
SpreadResult price_calendar_spread(const SpreadSpec& spec, std::span<const FactorParams> factors, double F0_1,
                                   double F0_2, const PricingOptions& opt = {});

}  // namespace seasonvol
