#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "seasonvol/model.hpp"
#include "seasonvol/statespace.hpp"

namespace seasonvol {

/// Linear-Gaussian system for one step: x_t = d + T x_{t-1} + η, η ~ N(0, Q);
/// y_t = c + Z x_t + ε, ε ~ N(0, H).
struct StepSystem {
  Eigen::VectorXd d;
  Eigen::MatrixXd T;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Z;
  Eigen::VectorXd c;
  Eigen::MatrixXd H;
};

/// Fills the system for step t given the filtered mean after step t - 1
/// (the prior mean for t = 0). State-dependent systems read it; others ignore it.
using StepProvider = std::function<void(std::size_t t, const Eigen::VectorXd& prev_mean, StepSystem& sys)>;

struct FilterOptions {
  double jitter = 1e-12;                    // added to V_t's diagonal before factorizing
  std::vector<Eigen::Index> floor_indices;  // state entries floored after each update
  double floor = kVarianceFloor;
  bool keep_history = true;
};

struct FilterOutput {
  double loglik = 0.0;
  std::size_t n_obs = 0;  // Σ k_t
  Eigen::VectorXd m0;
  Eigen::MatrixXd P0;
  std::vector<Eigen::VectorXd> innovation;
  std::vector<Eigen::MatrixXd> innovation_cov;
  std::vector<Eigen::VectorXd> predicted_mean, filtered_mean;
  std::vector<Eigen::MatrixXd> predicted_cov, filtered_cov;
  std::vector<Eigen::MatrixXd> transition;
  std::vector<bool> floored;
  std::size_t floor_events = 0;
};

/// Kalman filter over y[0..n). NaN entries of y_t are treated as missing and
/// their rows dropped for that step. Throws Error(Numerical) naming the step
/// if an innovation covariance is not positive definite.
FilterOutput kalman_filter(const std::vector<Eigen::VectorXd>& y, const Eigen::VectorXd& m0,
                           const Eigen::MatrixXd& P0, const StepProvider& provider,
                           const FilterOptions& opt = {});

struct SmootherOutput {
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::MatrixXd> cov;
};

/// Rauch–Tung–Striebel fixed-interval smoother; needs a filter run with history.
SmootherOutput rts_smooth(const FilterOutput& out);

struct ModelFilterOptions {
  double p0_var = 1e-4;   // prior variance of every state
  double jitter = 1e-12;
  bool keep_history = true;
};

/// The futures model on an observation series. Prior s1 = s2 = 0, s3 = v0.
FilterOutput filter(const ObservationSeries& obs, const ModelParams& params, const ModelFilterOptions& opt = {});

/// Log-likelihood only (no history kept).
double loglik(const ObservationSeries& obs, const ModelParams& params, const ModelFilterOptions& opt = {});

}  // namespace seasonvol
