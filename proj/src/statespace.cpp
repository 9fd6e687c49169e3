#include "seasonvol/statespace.hpp"

#include <algorithm>
#include <cmath>

#include "seasonvol/errors.hpp"

namespace seasonvol {

SystemMatrices build_system(const ModelParams& params, double t, double dt, std::span<const double> taus,
                            ObsMode mode, std::span<const double> s3, std::span<const double> log_f0) {
  validate(params);
  require(dt > 0.0, ErrorKind::Domain, "build_system: requires dt > 0");
  require(t >= 0.0, ErrorKind::Domain, "build_system: requires t >= 0");
  const auto n = static_cast<Eigen::Index>(params.factors.size());
  const auto k = static_cast<Eigen::Index>(taus.size());
  require(params.h.size() == taus.size(), ErrorKind::Config,
          "build_system: number of measurement errors h does not match the contract count");
  require(s3.size() == params.factors.size(), ErrorKind::Domain, "build_system: one s3 value per factor required");
  for (double tau : taus)
    require(std::isnan(tau) || tau >= 0.0, ErrorKind::Domain, "build_system: contract already matured");

  SystemMatrices sys;
  sys.d = Eigen::VectorXd::Zero(3 * n);
  sys.T = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  sys.R = Eigen::MatrixXd::Zero(3 * n, 2 * n);
  sys.Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.Z = Eigen::MatrixXd::Zero(k, 3 * n);
  sys.c = Eigen::VectorXd::Zero(k);
  sys.H = Eigen::MatrixXd::Zero(k, k);
  const double keep = mode == ObsMode::LogPrices ? 1.0 : 0.0;

  for (Eigen::Index j = 0; j < n; ++j) {
    const FactorParams& f = params.factors[static_cast<std::size_t>(j)];
    const Eigen::Index o = 3 * j;
    sys.d(o + 2) = f.kappa * detail::theta_unchecked(f.season, t) * dt;
    sys.T(o, o) = keep - f.lambda * dt;
    sys.T(o, o + 2) = f.pi_F * dt;
    sys.T(o + 1, o + 1) = keep - 2.0 * f.lambda * dt;
    sys.T(o + 1, o + 2) = dt;
    sys.T(o + 2, o + 2) = 1.0 - (f.kappa - f.sigma * f.pi_v) * dt;
    const double root = std::sqrt(std::max(s3[static_cast<std::size_t>(j)], kVarianceFloor));
    sys.R(o, 2 * j) = root;
    sys.R(o + 2, 2 * j + 1) = root * f.sigma;
    sys.Q(2 * j, 2 * j) = dt;
    sys.Q(2 * j + 1, 2 * j + 1) = dt;
    sys.Q(2 * j, 2 * j + 1) = sys.Q(2 * j + 1, 2 * j) = f.rho * dt;
    for (Eigen::Index m = 0; m < k; ++m) {
      const double tau = taus[static_cast<std::size_t>(m)];
      if (std::isnan(tau)) continue;
      const double e = std::exp(-f.lambda * tau);
      sys.Z(m, o) = e;
      sys.Z(m, o + 1) = -0.5 * e * e;
    }
  }
  for (Eigen::Index m = 0; m < k; ++m) {
    const double h = params.h[static_cast<std::size_t>(m)];
    sys.H(m, m) = h * h;
    if (mode == ObsMode::LogPrices && !log_f0.empty()) sys.c(m) = log_f0[static_cast<std::size_t>(m)];
  }
  return sys;
}

}  // namespace seasonvol
