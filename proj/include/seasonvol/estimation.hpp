#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seasonvol/kalman.hpp"
#include "seasonvol/model.hpp"
#include "seasonvol/statespace.hpp"

namespace seasonvol {

/// Which one-factor parameters the optimizer sees. π^v is always frozen at
/// zero; λ may be frozen at zero (no Samuelson damping).
struct ParamLayout {
  Pattern family = Pattern::Sinusoidal;
  bool lambda_free = true;
  std::size_t contracts = 0;

  std::vector<std::string> names() const;
  std::size_t size() const { return names().size(); }
};

/// Unconstrained coordinates: log for λ, κ, σ, v0, a, h and for b outside
/// the sinusoidal family; tan(πρ/2) for ρ; tan(π(t0 - ½)) for t0; identity
/// for π^F. Sinusoidal b is tied to a through b = a(½ + atan(β)/π) so b < a.
Eigen::VectorXd to_unconstrained(const ModelParams& p, const ParamLayout& layout);
ModelParams from_unconstrained(const Eigen::VectorXd& x, const ParamLayout& layout);

struct AnnealOptions {
  std::size_t restarts = 3;       // chains; chain 0 starts at the initial guess
  double temp_decay = 0.85;
  std::size_t trials_per_dim = 20;
  double target_accept = 0.4;
  double initial_step = 0.5;      // per-coordinate step in unconstrained space
  std::size_t max_stages = 80;
  std::size_t stall_stages = 4;   // stop after this many stages without improving by `tol`
  double tol = 1e-3;
};

struct FitOptions {
  std::uint64_t seed = 1;
  AnnealOptions anneal;
  bool polish = true;
  double hessian_step = 1e-4;
  std::optional<ModelParams> initial;  // default: heuristic from the data
  unsigned threads = 1;
  ModelFilterOptions filter;
};

struct ParamEstimate {
  std::string name;
  double value = 0.0;
  double transformed = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();  // standard error in unconstrained space
};

struct FitReport {
  std::string label;
  Pattern family = Pattern::Sinusoidal;
  bool lambda_frozen = false;
  std::size_t n_dates = 0;
  std::size_t n_obs = 0;
  std::size_t n_free = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::vector<ParamEstimate> params;
  ModelParams model;
  // Optimizer diagnostics.
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
  std::size_t stages = 0;
  std::size_t best_restart = 0;
  double acceptance = 0.0;
  bool polished = false;
  bool hessian_ok = false;
};

/// AIC = 2k - 2 ln L and BIC = k ln(n_dates) - 2 ln L.
double aic(double loglik, std::size_t n_free);
double bic(double loglik, std::size_t n_free, std::size_t n_dates);

/// Report with information criteria only (no estimates); used to inject
/// published log-likelihoods.
FitReport report_from_loglik(std::string label, Pattern family, bool lambda_frozen, double loglik,
                             std::size_t n_free, std::size_t n_dates);

/// Maximum likelihood by simulated annealing over the unconstrained
/// parameters, optional Nelder–Mead polish, standard errors from the inverse
/// negative Hessian. Throws Error(NonConvergence) if no chain ever moves.
FitReport fit(const ObservationSeries& obs, Pattern family, bool freeze_lambda, const FitOptions& opt = {});

/// Heuristic starting point for a family on given data.
ModelParams initial_guess(const ObservationSeries& obs, Pattern family, bool freeze_lambda);

/// Fills loglik/AIC/BIC/estimates for fixed parameters (no optimization).
FitReport evaluate(const ObservationSeries& obs, const ModelParams& params, bool freeze_lambda,
                   const ModelFilterOptions& opt = {});

struct LrResult {
  double d1 = 0.0, p1 = 1.0;  // seasonal vs non-seasonal, χ²(2)
  double d2 = 0.0, p2 = 1.0;  // seasonal vs λ = 0, χ²(1)
};

/// χ² survival function.
double chi2_sf(double x, double df);

/// Requires nested inputs: same date count, `seasonal` a seasonal family with
/// free λ, `nonseasonal` Constant with two fewer parameters, `nolambda` the
/// same family with λ frozen and one fewer parameter.
LrResult lr_tests(const FitReport& seasonal, const FitReport& nonseasonal, const FitReport& nolambda);

struct RankRow {
  std::string label;
  Pattern family = Pattern::Constant;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double delta_aic = 0.0;
  double weight = 0.0;
};

/// Ascending AIC with Δ_aic and Akaike weights exp(-Δ/2)/Σexp(-Δ/2).
std::vector<RankRow> rank_models(std::span<const FitReport> reports);

/// Four decimals, so p-values below 5e-5 print as 0.0000.
std::string format_pvalue(double p);

/// Key/value text: deterministic, round-trips through parse_report().
void write_report(std::ostream& os, const FitReport& r);
FitReport parse_report(std::istream& in, const std::string& source = "<report>");
/// One row per parameter: name,value,transformed,se.
void write_report_csv(std::ostream& os, const FitReport& r);
void write_ranking_csv(std::ostream& os, std::span<const RankRow> rows);
/// One row per seasonal free-λ report with D1/p1 against the single Constant
/// free-λ report and D2/p2 against the same family with λ frozen.
void write_lr_table_csv(std::ostream& os, std::span<const FitReport> reports);

}  // namespace seasonvol
