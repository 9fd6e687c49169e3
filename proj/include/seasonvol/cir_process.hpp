#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "seasonvol/model.hpp"

namespace seasonvol {

enum class Measure { RiskNeutral, Physical };

struct SimConfig {
  double horizon = 1.0;
  std::size_t steps = 252;
  std::size_t n_paths = 1000;
  Measure measure = Measure::RiskNeutral;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// One simulated path. v[j][n] is factor j's variance at times[n],
/// logF[m][n] the log futures price of contract m.
struct SimPath {
  std::vector<double> times;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> logF;
  Measure measure = Measure::RiskNeutral;
};

/// End-of-horizon summary per path, flattened path-major.
struct TerminalSample {
  std::size_t n_paths = 0;
  std::size_t n_factors = 0;
  std::size_t n_contracts = 0;
  std::vector<double> logF;          // [path * n_contracts + m]
  std::vector<double> v;             // [path * n_factors + j]
  std::vector<double> integrated_v;  // Σ v⁺ Δt, [path * n_factors + j]
  std::vector<double> min_v;         // min over factors and steps, [path]

  double log_return(std::size_t path, std::size_t m, std::span<const double> log_f0) const {
    return logF[path * n_contracts + m] - (log_f0.empty() ? 0.0 : log_f0[m]);
  }
};

/// Simulation time grid: `steps` uniform steps on [0, horizon], refined so
/// that every sawtooth jump time t0 + k of any factor is a grid point.
std::vector<double> simulation_grid(std::span<const FactorParams> factors, double horizon,
                                    std::size_t steps);

/// Euler full-truncation paths of the futures/variance system. Brownian
/// pairs are correlated ρ_j within a factor and independent across factors.
/// `log_f0` holds ln F(0, T_m) (empty = all zero).
std::vector<SimPath> simulate(std::span<const FactorParams> factors, std::span<const double> maturities,
                              std::span<const double> log_f0, const SimConfig& cfg);

/// Same dynamics as simulate() but keeps only end-of-horizon quantities, for
/// Monte Carlo oracles with many paths. Path p's draws are identical to
/// simulate()'s path p.
TerminalSample simulate_terminal(std::span<const FactorParams> factors, std::span<const double> maturities,
                                 std::span<const double> log_f0, const SimConfig& cfg);

/// CSV dump: header `time,path_id,factor,v,contract,logF`; one row per
/// factor and one per contract at each time.
void write_paths_csv(std::ostream& os, std::span<const SimPath> paths);

struct ComparisonReport {
  bool holds = true;            // no violation beyond tolerance on any path
  std::size_t violating_paths = 0;
  std::size_t violating_steps = 0;
  double worst_gap = 0.0;       // min over paths/steps of v - ṽ
  double violation_fraction = 0.0;
};

/// Path-wise comparison of the seasonal variance v (level θ(t)) against
/// ṽ (level theta_min, start v_tilde0) under shared Brownian increments.
/// Requires v_tilde0 <= v0 and theta_min <= θ(t) on a dense sample.
/// Steps sqrt(v) drift-implicitly when σ² < 4κ·theta_min, full-truncation
/// Euler otherwise.
ComparisonReport comparison_check(const FactorParams& seasonal, double theta_min, double v_tilde0,
                                  double horizon, std::size_t steps, std::size_t n_paths,
                                  std::uint64_t seed, double tolerance = 1e-12);

/// Seed expansion: a 64-bit run seed plus (path, stream) counters map to an
/// independent engine seed via SplitMix64 mixing.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

}  // namespace seasonvol
