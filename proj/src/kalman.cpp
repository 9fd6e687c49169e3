#include "seasonvol/kalman.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "seasonvol/errors.hpp"

namespace seasonvol {

namespace {

void symmetrize(Eigen::MatrixXd& M) { M = 0.5 * (M + M.transpose()).eval(); }

}  // namespace

FilterOutput kalman_filter(const std::vector<Eigen::VectorXd>& y, const Eigen::VectorXd& m0,
                           const Eigen::MatrixXd& P0, const StepProvider& provider, const FilterOptions& opt) {
  const Eigen::Index ns = m0.size();
  require(P0.rows() == ns && P0.cols() == ns, ErrorKind::Domain, "kalman_filter: prior dimensions disagree");
  FilterOutput out;
  out.m0 = m0;
  out.P0 = P0;
  const std::size_t steps = y.size();
  if (opt.keep_history) {
    out.innovation.reserve(steps);
    out.innovation_cov.reserve(steps);
    out.predicted_mean.reserve(steps);
    out.filtered_mean.reserve(steps);
    out.predicted_cov.reserve(steps);
    out.filtered_cov.reserve(steps);
    out.transition.reserve(steps);
    out.floored.reserve(steps);
  }

  const double log2pi = std::log(2.0 * std::numbers::pi);
  Eigen::VectorXd m = m0, a;
  Eigen::MatrixXd P = P0, Pp;
  StepSystem sys;
  std::vector<Eigen::Index> rows;
  Eigen::MatrixXd Zs, V, PZt, K;
  Eigen::VectorXd v;

  for (std::size_t t = 0; t < steps; ++t) {
    provider(t, m, sys);
    a = sys.d + sys.T * m;
    Pp = sys.T * P * sys.T.transpose() + sys.Q;
    symmetrize(Pp);

    const Eigen::VectorXd& yt = y[t];
    rows.clear();
    for (Eigen::Index i = 0; i < yt.size(); ++i)
      if (std::isfinite(yt(i))) rows.push_back(i);
    const auto kt = static_cast<Eigen::Index>(rows.size());

    if (kt == 0) {
      m = a;
      P = Pp;
      v.resize(0);
      V.resize(0, 0);
    } else {
      Zs.resize(kt, ns);
      v.resize(kt);
      V.resize(kt, kt);
      for (Eigen::Index r = 0; r < kt; ++r) {
        Zs.row(r) = sys.Z.row(rows[r]);
        v(r) = yt(rows[r]) - sys.c(rows[r]);
        for (Eigen::Index s = 0; s < kt; ++s) V(r, s) = sys.H(rows[r], rows[s]);
      }
      v.noalias() -= Zs * a;
      PZt.noalias() = Pp * Zs.transpose();
      V.noalias() += Zs * PZt;
      symmetrize(V);
      V.diagonal().array() += opt.jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(V);
      if (llt.info() != Eigen::Success)
        fail(ErrorKind::Numerical,
             "kalman_filter: innovation covariance not positive definite at step " + std::to_string(t));
      const auto& L = llt.matrixL();
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < kt; ++i) logdet += std::log(L(i, i));
      logdet *= 2.0;
      const Eigen::VectorXd w = llt.solve(v);
      out.loglik -= 0.5 * (static_cast<double>(kt) * log2pi + logdet + v.dot(w));
      out.n_obs += static_cast<std::size_t>(kt);
      K = llt.solve(PZt.transpose()).transpose();
      m = a + PZt * w;
      P = Pp - K * PZt.transpose();
      symmetrize(P);
    }

    bool floored = false;
    for (Eigen::Index i : opt.floor_indices)
      if (m(i) < opt.floor) {
        m(i) = opt.floor;
        floored = true;
      }
    if (floored) ++out.floor_events;
    if (!std::isfinite(out.loglik))
      fail(ErrorKind::Numerical, "kalman_filter: non-finite log-likelihood at step " + std::to_string(t));

    if (opt.keep_history) {
      out.innovation.push_back(v);
      out.innovation_cov.push_back(V);
      out.predicted_mean.push_back(a);
      out.predicted_cov.push_back(Pp);
      out.filtered_mean.push_back(m);
      out.filtered_cov.push_back(P);
      out.transition.push_back(sys.T);
      out.floored.push_back(floored);
    }
  }
  return out;
}

SmootherOutput rts_smooth(const FilterOutput& out) {
  const std::size_t n = out.filtered_mean.size();
  require(out.predicted_mean.size() == n && out.transition.size() == n, ErrorKind::Contract,
          "rts_smooth: filter output lacks history");
  SmootherOutput s;
  s.mean.resize(n);
  s.cov.resize(n);
  if (n == 0) return s;
  s.mean[n - 1] = out.filtered_mean[n - 1];
  s.cov[n - 1] = out.filtered_cov[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) {
    const Eigen::MatrixXd& Pp = out.predicted_cov[t + 1];
    // J = P_t T' Pp^{-1}, via a solve against the symmetric Pp.
    const Eigen::MatrixXd J =
        Pp.ldlt().solve(out.transition[t + 1] * out.filtered_cov[t]).transpose();
    s.mean[t] = out.filtered_mean[t] + J * (s.mean[t + 1] - out.predicted_mean[t + 1]);
    Eigen::MatrixXd C = out.filtered_cov[t] + J * (s.cov[t + 1] - Pp) * J.transpose();
    s.cov[t] = 0.5 * (C + C.transpose());
  }
  return s;
}

namespace {

FilterOutput run_model(const ObservationSeries& obs, const ModelParams& params, const ModelFilterOptions& opt,
                       bool history) {
  validate(params);
  const std::size_t n = params.factors.size();
  const std::size_t k = obs.slots();
  require(obs.times.size() == obs.steps() + 1, ErrorKind::Domain,
          "filter: observation series needs one more time than observation rows");
  require(static_cast<std::size_t>(obs.tau.rows()) == obs.steps() && static_cast<std::size_t>(obs.tau.cols()) == k,
          ErrorKind::Domain, "filter: maturity matrix does not match observations");
  require(params.h.size() == k, ErrorKind::Config,
          "filter: number of measurement errors h (" + std::to_string(params.h.size()) +
              ") does not match the contract count (" + std::to_string(k) + ")");
  if (obs.mode == ObsMode::LogPrices)
    require(obs.log_f0.size() == k, ErrorKind::Domain, "filter: log-price mode needs ln F(0, T_m) per slot");
  for (std::size_t t = 0; t < obs.steps(); ++t)
    require(obs.times[t + 1] > obs.times[t], ErrorKind::Domain, "filter: observation times must increase");

  const auto ns = static_cast<Eigen::Index>(3 * n);
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(ns);
  for (std::size_t j = 0; j < n; ++j) m0(static_cast<Eigen::Index>(3 * j + 2)) = params.factors[j].v0;
  const Eigen::MatrixXd P0 = opt.p0_var * Eigen::MatrixXd::Identity(ns, ns);

  std::vector<Eigen::VectorXd> y(obs.steps());
  for (std::size_t t = 0; t < obs.steps(); ++t) y[t] = obs.y.row(static_cast<Eigen::Index>(t)).transpose();

  // Time-invariant parts filled once; only d, T's dt terms, Q and Z change.
  const bool prices = obs.mode == ObsMode::LogPrices;
  const double keep = prices ? 1.0 : 0.0;
  StepProvider provider = [&](std::size_t t, const Eigen::VectorXd& prev, StepSystem& sys) {
    const double t0 = obs.times[t];
    const double dt = obs.times[t + 1] - t0;
    if (sys.d.size() != ns) {
      sys.d = Eigen::VectorXd::Zero(ns);
      sys.T = Eigen::MatrixXd::Zero(ns, ns);
      sys.Q = Eigen::MatrixXd::Zero(ns, ns);
      sys.Z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), ns);
      sys.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
      sys.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      for (std::size_t m = 0; m < k; ++m) {
        const auto mi = static_cast<Eigen::Index>(m);
        sys.H(mi, mi) = params.h[m] * params.h[m];
        if (prices) sys.c(mi) = obs.log_f0[m];
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      const FactorParams& f = params.factors[j];
      const auto o = static_cast<Eigen::Index>(3 * j);
      sys.d(o + 2) = f.kappa * detail::theta_unchecked(f.season, t0) * dt;
      sys.T(o, o) = keep - f.lambda * dt;
      sys.T(o, o + 2) = f.pi_F * dt;
      sys.T(o + 1, o + 1) = keep - 2.0 * f.lambda * dt;
      sys.T(o + 1, o + 2) = dt;
      sys.T(o + 2, o + 2) = 1.0 - (f.kappa - f.sigma * f.pi_v) * dt;
      const double s3 = std::max(prev(o + 2), kVarianceFloor) * dt;
      sys.Q(o, o) = s3;
      sys.Q(o, o + 2) = sys.Q(o + 2, o) = f.rho * f.sigma * s3;
      sys.Q(o + 2, o + 2) = f.sigma * f.sigma * s3;
      for (std::size_t m = 0; m < k; ++m) {
        const double tau = obs.tau(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
        const double e = std::isfinite(tau) ? std::exp(-f.lambda * tau) : 0.0;
        sys.Z(static_cast<Eigen::Index>(m), o) = e;
        sys.Z(static_cast<Eigen::Index>(m), o + 1) = -0.5 * e * e;
      }
    }
  };

  FilterOptions fo;
  fo.jitter = opt.jitter;
  fo.keep_history = history;
  for (std::size_t j = 0; j < n; ++j) fo.floor_indices.push_back(static_cast<Eigen::Index>(3 * j + 2));
  return kalman_filter(y, m0, P0, provider, fo);
}

}  // namespace

FilterOutput filter(const ObservationSeries& obs, const ModelParams& params, const ModelFilterOptions& opt) {
  return run_model(obs, params, opt, opt.keep_history);
}

double loglik(const ObservationSeries& obs, const ModelParams& params, const ModelFilterOptions& opt) {
  return run_model(obs, params, opt, false).loglik;
}

}  // namespace seasonvol
