#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seasonvol/model.hpp"

namespace seasonvol {

enum class ObsMode { LogPrices, LogReturns };

/// Observations ready for filtering. Step t runs from times[t] to
/// times[t + 1] and observes row t of `y`; missing entries are NaN.
struct ObservationSeries {
  ObsMode mode = ObsMode::LogReturns;
  std::vector<double> times;       // year fractions (ACT/365 from the first date), rows + 1 entries
  std::vector<std::string> labels; // date labels aligned with `times` (may be empty)
  Eigen::MatrixXd y;               // steps x k
  Eigen::MatrixXd tau;             // time to maturity of the observed contract, steps x k
  std::vector<double> log_f0;      // LogPrices only: ln F(0, T_m) per slot
  std::vector<std::uint8_t> entering;  // steps x k row-major; 1 = zero return of a newly listed contract

  std::size_t steps() const { return static_cast<std::size_t>(y.rows()); }
  std::size_t slots() const { return static_cast<std::size_t>(y.cols()); }
};

/// Discrete system for one filter step (3 states per factor: s1, s2, s3).
struct SystemMatrices {
  Eigen::VectorXd d;  // κθ(t)Δt in the s3 slot
  Eigen::MatrixXd T;
  Eigen::MatrixXd R;  // √s3 · [[1,0],[0,0],[0,σ]] per factor
  Eigen::MatrixXd Q;  // [[Δt, ρΔt],[ρΔt, Δt]] per factor
  Eigen::MatrixXd Z;  // (e^{-λτ}, -½e^{-2λτ}, 0) per contract and factor
  Eigen::VectorXd c;
  Eigen::MatrixXd H;  // diag(h_i²)

  Eigen::MatrixXd state_cov() const { return R * Q * R.transpose(); }
};

/// Builds the system for the step from t to t + dt. `taus` holds the time to
/// maturity of each slot at t + dt (one per h entry). `s3` is the plug-in
/// variance per factor used by R (floored at 1e-10). `log_f0` gives the
/// LogPrices offsets c (ignored for LogReturns, where c = 0).
SystemMatrices build_system(const ModelParams& params, double t, double dt, std::span<const double> taus,
                            ObsMode mode, std::span<const double> s3, std::span<const double> log_f0 = {});

inline constexpr double kVarianceFloor = 1e-10;

}  // namespace seasonvol
