#include "seasonvol/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "seasonvol/cir_process.hpp"
#include "seasonvol/errors.hpp"

namespace seasonvol {

namespace {

constexpr double kPenalty = 1e100;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<std::string> ParamLayout::names() const {
  std::vector<std::string> n;
  if (lambda_free) n.push_back("lambda");
  for (const char* s : {"kappa", "sigma", "rho", "v0", "a"}) n.push_back(s);
  if (family != Pattern::Constant) {
    n.push_back("b");
    n.push_back("t0");
  }
  n.push_back("pi_F");
  for (std::size_t m = 0; m < contracts; ++m) n.push_back("h" + std::to_string(m + 1));
  return n;
}

Eigen::VectorXd to_unconstrained(const ModelParams& p, const ParamLayout& layout) {
  require(p.factors.size() == 1, ErrorKind::Domain, "estimation supports one-factor models only");
  require(p.h.size() == layout.contracts, ErrorKind::Config, "estimation: h count does not match the contract count");
  const FactorParams& f = p.factors[0];
  require(f.season.pattern == layout.family, ErrorKind::Domain, "estimation: seasonality pattern does not match the family");
  validate(p);
  Eigen::VectorXd x(static_cast<Eigen::Index>(layout.size()));
  Eigen::Index i = 0;
  if (layout.lambda_free) {
    require(f.lambda > 0.0, ErrorKind::Domain, "estimation: free lambda must be > 0");
    x(i++) = std::log(f.lambda);
  }
  x(i++) = std::log(f.kappa);
  x(i++) = std::log(f.sigma);
  x(i++) = std::tan(0.5 * std::numbers::pi * f.rho);
  x(i++) = std::log(f.v0);
  x(i++) = std::log(f.season.a);
  if (layout.family != Pattern::Constant) {
    if (layout.family == Pattern::Sinusoidal) {
      require(f.season.b < f.season.a, ErrorKind::Domain, "estimation: sinusoidal b must be < a");
      x(i++) = std::tan(std::numbers::pi * (f.season.b / f.season.a - 0.5));
    } else {
      x(i++) = std::log(f.season.b);
    }
    require(f.season.t0 > 0.0, ErrorKind::Domain, "estimation: t0 must lie in (0, 1)");
    x(i++) = std::tan(std::numbers::pi * (f.season.t0 - 0.5));
  }
  x(i++) = f.pi_F;
  for (double h : p.h) x(i++) = std::log(h);
  return x;
}

ModelParams from_unconstrained(const Eigen::VectorXd& x, const ParamLayout& layout) {
  require(static_cast<std::size_t>(x.size()) == layout.size(), ErrorKind::Domain,
          "estimation: parameter vector has the wrong length");
  FactorParams f;
  Eigen::Index i = 0;
  f.lambda = layout.lambda_free ? std::exp(x(i++)) : 0.0;
  f.kappa = std::exp(x(i++));
  f.sigma = std::exp(x(i++));
  f.rho = 2.0 / std::numbers::pi * std::atan(x(i++));
  f.v0 = std::exp(x(i++));
  f.season.pattern = layout.family;
  f.season.a = std::exp(x(i++));
  if (layout.family != Pattern::Constant) {
    if (layout.family == Pattern::Sinusoidal)
      f.season.b = f.season.a * (0.5 + std::atan(x(i++)) / std::numbers::pi);
    else
      f.season.b = std::exp(x(i++));
    f.season.t0 = 0.5 + std::atan(x(i++)) / std::numbers::pi;
  }
  f.pi_F = x(i++);
  f.pi_v = 0.0;
  ModelParams p;
  p.factors = {f};
  for (std::size_t m = 0; m < layout.contracts; ++m) p.h.push_back(std::exp(x(i++)));
  return p;
}

double aic(double loglik, std::size_t n_free) { return 2.0 * static_cast<double>(n_free) - 2.0 * loglik; }

double bic(double loglik, std::size_t n_free, std::size_t n_dates) {
  return static_cast<double>(n_free) * std::log(static_cast<double>(n_dates)) - 2.0 * loglik;
}

FitReport report_from_loglik(std::string label, Pattern family, bool lambda_frozen, double loglik,
                             std::size_t n_free, std::size_t n_dates) {
  FitReport r;
  r.label = std::move(label);
  r.family = family;
  r.lambda_frozen = lambda_frozen;
  r.loglik = loglik;
  r.n_free = n_free;
  r.n_dates = n_dates;
  r.aic = aic(loglik, n_free);
  r.bic = bic(loglik, n_free, n_dates);
  return r;
}

namespace {

struct Objective {
  const ObservationSeries& obs;
  const ParamLayout& layout;
  const ModelFilterOptions& fopt;
  std::atomic<std::size_t>* evals;

  double operator()(const Eigen::VectorXd& x) const {
    if (evals) evals->fetch_add(1, std::memory_order_relaxed);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!std::isfinite(x(i)) || std::abs(x(i)) > 50.0) return kPenalty;
    try {
      const double ll = loglik(obs, from_unconstrained(x, layout), fopt);
      return std::isfinite(ll) ? -ll : kPenalty;
    } catch (const Error&) {
      return kPenalty;
    }
  }
};

struct ChainResult {
  Eigen::VectorXd x;
  double f = kPenalty;
  std::size_t stages = 0;
  std::size_t accepted = 0;
  std::size_t trials = 0;
};

ChainResult anneal_chain(const Objective& F, Eigen::VectorXd x, const AnnealOptions& ao, std::uint64_t seed) {
  const Eigen::Index dim = x.size();
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::VectorXd step = Eigen::VectorXd::Constant(dim, ao.initial_step);

  ChainResult res;
  double f = F(x);
  res.x = x;
  res.f = f;

  // Initial temperature: median size of uphill moves from the start.
  std::vector<double> uphill;
  for (Eigen::Index i = 0; i < 2 * dim; ++i) {
    Eigen::VectorXd xp = x;
    xp(i % dim) += (2.0 * U(eng) - 1.0) * step(i % dim);
    const double fp = F(xp);
    if (fp < kPenalty && f < kPenalty && fp > f) uphill.push_back(fp - f);
  }
  double temp = 1.0;
  if (!uphill.empty()) {
    std::nth_element(uphill.begin(), uphill.begin() + uphill.size() / 2, uphill.end());
    temp = std::max(uphill[uphill.size() / 2], 1e-3);
  }

  std::vector<double> stage_f;
  const std::size_t per_stage = ao.trials_per_dim * static_cast<std::size_t>(dim);
  std::vector<std::size_t> acc(static_cast<std::size_t>(dim)), tries(static_cast<std::size_t>(dim));
  for (std::size_t stage = 0; stage < ao.max_stages; ++stage) {
    std::fill(acc.begin(), acc.end(), 0);
    std::fill(tries.begin(), tries.end(), 0);
    for (std::size_t trial = 0; trial < per_stage; ++trial) {
      const auto h = static_cast<Eigen::Index>(trial % static_cast<std::size_t>(dim));
      Eigen::VectorXd xp = x;
      xp(h) += (2.0 * U(eng) - 1.0) * step(h);
      const double fp = F(xp);
      ++tries[static_cast<std::size_t>(h)];
      ++res.trials;
      const double u = U(eng);
      if (fp < kPenalty && (fp <= f || u < std::exp(-(fp - f) / temp))) {
        x = xp;
        f = fp;
        ++acc[static_cast<std::size_t>(h)];
        ++res.accepted;
        if (f < res.f) {
          res.f = f;
          res.x = x;
        }
      }
    }
    for (Eigen::Index h = 0; h < dim; ++h) {
      const double r = static_cast<double>(acc[static_cast<std::size_t>(h)]) /
                       static_cast<double>(std::max<std::size_t>(tries[static_cast<std::size_t>(h)], 1));
      const double hi = ao.target_accept + 0.1, lo = ao.target_accept - 0.1;
      if (r > hi)
        step(h) *= 1.0 + 2.0 * (r - hi) / (1.0 - hi);
      else if (r < lo)
        step(h) /= 1.0 + 2.0 * (lo - r) / lo;
      step(h) = std::clamp(step(h), 1e-8, 10.0);
    }
    ++res.stages;
    stage_f.push_back(f);
    temp *= ao.temp_decay;
    if (stage_f.size() > ao.stall_stages) {
      bool flat = std::abs(f - res.f) <= ao.tol;
      for (std::size_t s = 1; s <= ao.stall_stages && flat; ++s)
        flat = std::abs(stage_f[stage_f.size() - 1 - s] - f) <= ao.tol;
      if (flat) break;
    }
  }
  return res;
}

struct NmData {
  const Objective* F;
  Eigen::Index dim;
};

double nm_f(const gsl_vector* v, void* params) {
  const auto* d = static_cast<const NmData*>(params);
  Eigen::VectorXd x(d->dim);
  for (Eigen::Index i = 0; i < d->dim; ++i) x(i) = gsl_vector_get(v, static_cast<std::size_t>(i));
  return (*d->F)(x);
}

bool nelder_mead(const Objective& F, Eigen::VectorXd& x, double& f) {
  const Eigen::Index dim = x.size();
  NmData data{&F, dim};
  gsl_multimin_function fn{&nm_f, static_cast<std::size_t>(dim), &data};
  gsl_vector* start = gsl_vector_alloc(static_cast<std::size_t>(dim));
  gsl_vector* step = gsl_vector_alloc(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    gsl_vector_set(start, static_cast<std::size_t>(i), x(i));
    gsl_vector_set(step, static_cast<std::size_t>(i), 0.05);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, static_cast<std::size_t>(dim));
  gsl_multimin_fminimizer_set(s, &fn, start, step);
  for (int iter = 0; iter < 4000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-7) == GSL_SUCCESS) break;
  }
  bool improved = false;
  if (s->fval < f) {
    f = s->fval;
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = gsl_vector_get(s->x, static_cast<std::size_t>(i));
    improved = true;
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(start);
  gsl_vector_free(step);
  return improved;
}

// Hessian of the log-likelihood (= -F) by central differences.
Eigen::MatrixXd loglik_hessian(const Objective& F, const Eigen::VectorXd& x, double f0, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = rel_step * std::max(std::abs(x(i)), 1.0);
  Eigen::MatrixXd H(n, n);
  auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Eigen::VectorXd y = x;
    y(i) += si * h(i);
    y(j) += sj * h(j);
    return -F(y);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd yp = x, ym = x;
    yp(i) += h(i);
    ym(i) -= h(i);
    H(i, i) = (-F(yp) + 2.0 * f0 - F(ym)) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h(i) * h(j));
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

void fill_estimates(FitReport& r, const ParamLayout& layout, const Eigen::VectorXd& x, const Eigen::VectorXd& se) {
  const auto names = layout.names();
  const ModelParams p = from_unconstrained(x, layout);
  const FactorParams& f = p.factors[0];
  std::map<std::string, double> natural = {{"lambda", f.lambda}, {"kappa", f.kappa}, {"sigma", f.sigma},
                                           {"rho", f.rho},       {"v0", f.v0},       {"a", f.season.a},
                                           {"b", f.season.b},    {"t0", f.season.t0}, {"pi_F", f.pi_F}};
  for (std::size_t m = 0; m < p.h.size(); ++m) natural["h" + std::to_string(m + 1)] = p.h[m];
  r.params.clear();
  for (std::size_t i = 0; i < names.size(); ++i)
    r.params.push_back({names[i], natural.at(names[i]), x(static_cast<Eigen::Index>(i)),
                        se.size() ? se(static_cast<Eigen::Index>(i)) : kNaN});
  r.model = p;
}

std::size_t count_dates(const ObservationSeries& obs) { return obs.times.size(); }

}  // namespace

ModelParams initial_guess(const ObservationSeries& obs, Pattern family, bool freeze_lambda) {
  const std::size_t k = obs.slots();
  require(k >= 1 && obs.steps() >= 2, ErrorKind::Domain, "estimation: observation series too short");
  const double mean_dt = (obs.times.back() - obs.times.front()) / static_cast<double>(obs.steps());
  std::vector<double> sd(k, 0.0);
  for (std::size_t m = 0; m < k; ++m) {
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < obs.steps(); ++t) {
      const double r = obs.y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      if (!std::isfinite(r) || (!obs.entering.empty() && obs.entering[t * k + m])) continue;
      s += r;
      s2 += r * r;
      ++n;
    }
    sd[m] = n > 1 ? std::sqrt(std::max(s2 / n - (s / n) * (s / n), 1e-12)) : 0.01;
  }
  FactorParams f;
  const double var = std::clamp(sd[0] * sd[0] / std::max(mean_dt, 1e-6), 1e-4, 4.0);
  f.lambda = freeze_lambda ? 0.0 : 0.5;
  f.kappa = 1.5;
  f.sigma = 0.3;
  f.rho = 0.0;
  f.v0 = var;
  f.season = {family, var, family == Pattern::Constant ? 0.0 : 0.5 * var, family == Pattern::Constant ? 0.0 : 0.5};
  f.pi_F = 0.0;
  ModelParams p;
  p.factors = {f};
  for (std::size_t m = 0; m < k; ++m) p.h.push_back(std::max(0.25 * sd[m], 1e-4));
  return p;
}

FitReport evaluate(const ObservationSeries& obs, const ModelParams& params, bool freeze_lambda,
                   const ModelFilterOptions& opt) {
  require(params.factors.size() == 1, ErrorKind::Domain, "estimation supports one-factor models only");
  const ParamLayout layout{params.factors[0].season.pattern, !freeze_lambda, obs.slots()};
  ModelParams p = params;
  if (freeze_lambda) p.factors[0].lambda = 0.0;
  const Eigen::VectorXd x = to_unconstrained(p, layout);
  FitReport r = report_from_loglik(to_string(layout.family).data(), layout.family, freeze_lambda,
                                   loglik(obs, p, opt), layout.size(), count_dates(obs));
  r.n_obs = filter(obs, p, {opt.p0_var, opt.jitter, false}).n_obs;
  fill_estimates(r, layout, x, {});
  return r;
}

FitReport fit(const ObservationSeries& obs, Pattern family, bool freeze_lambda, const FitOptions& opt) {
  const ParamLayout layout{family, !freeze_lambda, obs.slots()};
  ModelParams start = opt.initial ? *opt.initial : initial_guess(obs, family, freeze_lambda);
  require(start.factors.size() == 1, ErrorKind::Domain, "estimation supports one-factor models only");
  if (start.factors[0].season.pattern != family) {
    // Carry the level over from a different family's starting point.
    const double a = start.factors[0].season.a;
    start.factors[0].season = {family, a, family == Pattern::Constant ? 0.0 : 0.5 * a,
                               family == Pattern::Constant ? 0.0 : 0.5};
  }
  if (freeze_lambda) start.factors[0].lambda = 0.0;
  if (!freeze_lambda && start.factors[0].lambda <= 0.0) start.factors[0].lambda = 0.5;
  const Eigen::VectorXd x0 = to_unconstrained(start, layout);

  std::atomic<std::size_t> evals{0};
  const Objective F{obs, layout, opt.filter, &evals};
  require(F(x0) < kPenalty, ErrorKind::Numerical, "estimation: likelihood is not finite at the starting point");

  const std::size_t chains = std::max<std::size_t>(opt.anneal.restarts, 1);
  std::vector<Eigen::VectorXd> starts(chains, x0);
  for (std::size_t c = 1; c < chains; ++c) {
    std::mt19937_64 eng(stream_seed(opt.seed, c, 0));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (Eigen::Index i = 0; i < x0.size(); ++i) starts[c](i) += U(eng);
  }
  std::vector<ChainResult> results(chains);
  auto run = [&](std::size_t c) { results[c] = anneal_chain(F, starts[c], opt.anneal, stream_seed(opt.seed, c, 1)); };
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(chains)));
  if (workers == 1) {
    for (std::size_t c = 0; c < chains; ++c) run(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chains;) run(c);
      });
  }

  std::size_t best = 0, accepted = 0, trials = 0, stages = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    accepted += results[c].accepted;
    trials += results[c].trials;
    stages += results[c].stages;
    if (results[c].f < results[best].f) best = c;
  }
  if (accepted == 0) fail(ErrorKind::NonConvergence, "estimation: no annealing chain accepted a move");

  Eigen::VectorXd x = results[best].x;
  double f = results[best].f;
  bool polished = false;
  if (opt.polish) polished = nelder_mead(F, x, f);

  FitReport r = report_from_loglik(to_string(family).data(), family, freeze_lambda, -f, layout.size(),
                                   count_dates(obs));
  r.seed = opt.seed;
  r.best_restart = best;
  r.stages = stages;
  r.acceptance = trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0;
  r.polished = polished;
  const ModelParams fitted = from_unconstrained(x, layout);
  r.n_obs = filter(obs, fitted, {opt.filter.p0_var, opt.filter.jitter, false}).n_obs;

  const Eigen::MatrixXd H = loglik_hessian(F, x, f, opt.hessian_step);
  Eigen::VectorXd se = Eigen::VectorXd::Constant(x.size(), kNaN);
  const Eigen::MatrixXd negH = -H;
  Eigen::LLT<Eigen::MatrixXd> llt(negH);
  if (llt.info() == Eigen::Success && negH.allFinite()) {
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(x.size(), x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) se(i) = std::sqrt(std::max(cov(i, i), 0.0));
    r.hessian_ok = true;
  }
  fill_estimates(r, layout, x, se);
  r.evaluations = evals.load();
  return r;
}

double chi2_sf(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

LrResult lr_tests(const FitReport& seasonal, const FitReport& nonseasonal, const FitReport& nolambda) {
  auto bad = [](const std::string& why) { fail(ErrorKind::Contract, "lr_tests: reports are not nested: " + why); };
  if (seasonal.family == Pattern::Constant || seasonal.lambda_frozen) bad("first report must be seasonal with free lambda");
  if (nonseasonal.family != Pattern::Constant || nonseasonal.lambda_frozen) bad("second report must be non-seasonal with free lambda");
  if (nolambda.family != seasonal.family || !nolambda.lambda_frozen) bad("third report must be the same family with lambda frozen");
  if (seasonal.n_dates != nonseasonal.n_dates || seasonal.n_dates != nolambda.n_dates) bad("date counts differ");
  if (seasonal.n_free != nonseasonal.n_free + 2) bad("seasonal model must have two more parameters than the non-seasonal one");
  if (seasonal.n_free != nolambda.n_free + 1) bad("lambda-frozen model must have one parameter fewer");
  LrResult r;
  r.d1 = 2.0 * (seasonal.loglik - nonseasonal.loglik);
  r.p1 = chi2_sf(r.d1, 2.0);
  r.d2 = 2.0 * (seasonal.loglik - nolambda.loglik);
  r.p2 = chi2_sf(r.d2, 1.0);
  return r;
}

std::vector<RankRow> rank_models(std::span<const FitReport> reports) {
  std::vector<RankRow> rows;
  for (const auto& r : reports) rows.push_back({r.label, r.family, r.loglik, r.aic, r.bic, 0.0, 0.0});
  std::stable_sort(rows.begin(), rows.end(), [](const RankRow& a, const RankRow& b) { return a.aic < b.aic; });
  if (rows.empty()) return rows;
  const double best = rows.front().aic;
  double total = 0.0;
  for (auto& r : rows) {
    r.delta_aic = r.aic - best;
    r.weight = std::exp(-0.5 * r.delta_aic);
    total += r.weight;
  }
  for (auto& r : rows) r.weight /= total;
  return rows;
}

std::string format_pvalue(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_report(std::ostream& os, const FitReport& r) {
  os << "label = " << r.label << '\n'
     << "family = " << to_string(r.family) << '\n'
     << "lambda_frozen = " << (r.lambda_frozen ? 1 : 0) << '\n'
     << "n_dates = " << r.n_dates << '\n'
     << "n_obs = " << r.n_obs << '\n'
     << "n_free = " << r.n_free << '\n'
     << "loglik = " << g17(r.loglik) << '\n'
     << "aic = " << g17(r.aic) << '\n'
     << "bic = " << g17(r.bic) << '\n'
     << "seed = " << r.seed << '\n'
     << "evaluations = " << r.evaluations << '\n'
     << "stages = " << r.stages << '\n'
     << "best_restart = " << r.best_restart << '\n'
     << "acceptance = " << g17(r.acceptance) << '\n'
     << "polished = " << (r.polished ? 1 : 0) << '\n'
     << "hessian_ok = " << (r.hessian_ok ? 1 : 0) << '\n';
  for (const auto& p : r.params)
    os << "param." << p.name << " = " << g17(p.value) << ',' << g17(p.transformed) << ',' << g17(p.se) << '\n';
}

FitReport parse_report(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Config, source + ":" + std::to_string(lineno) + ": expected key = value");
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    kv[key] = strip(line.substr(eq + 1));
    if (key.rfind("param.", 0) == 0) order.push_back(key.substr(6));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::Config, source + ": missing key '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) {
    const std::string& s = get(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) fail(ErrorKind::Config, source + ": key '" + key + "' is not a number");
    return v;
  };
  auto opt_num = [&](const std::string& key, double dflt) { return kv.count(key) ? num(key) : dflt; };

  FitReport r;
  r.label = kv.count("label") ? kv["label"] : "";
  r.family = parse_pattern(get("family"));
  r.lambda_frozen = opt_num("lambda_frozen", 0.0) != 0.0;
  r.n_dates = static_cast<std::size_t>(num("n_dates"));
  r.n_obs = static_cast<std::size_t>(opt_num("n_obs", 0.0));
  r.n_free = static_cast<std::size_t>(num("n_free"));
  r.loglik = num("loglik");
  r.aic = kv.count("aic") ? num("aic") : aic(r.loglik, r.n_free);
  r.bic = kv.count("bic") ? num("bic") : bic(r.loglik, r.n_free, r.n_dates);
  r.seed = static_cast<std::uint64_t>(std::strtoull(kv.count("seed") ? kv["seed"].c_str() : "0", nullptr, 10));
  r.evaluations = static_cast<std::size_t>(opt_num("evaluations", 0.0));
  r.stages = static_cast<std::size_t>(opt_num("stages", 0.0));
  r.best_restart = static_cast<std::size_t>(opt_num("best_restart", 0.0));
  r.acceptance = opt_num("acceptance", 0.0);
  r.polished = opt_num("polished", 0.0) != 0.0;
  r.hessian_ok = opt_num("hessian_ok", 0.0) != 0.0;

  std::size_t contracts = 0;
  for (const auto& name : order) {
    const std::string& s = kv["param." + name];
    ParamEstimate p;
    p.name = name;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &p.value, &p.transformed, &p.se) < 1)
      fail(ErrorKind::Config, source + ": malformed parameter line for '" + name + "'");
    if (name.size() > 1 && name[0] == 'h' && std::isdigit(static_cast<unsigned char>(name[1]))) ++contracts;
    r.params.push_back(p);
  }
  if (!r.params.empty()) {
    std::map<std::string, double> v;
    for (const auto& p : r.params) v[p.name] = p.value;
    FactorParams f;
    f.lambda = v.count("lambda") ? v["lambda"] : 0.0;
    f.kappa = v["kappa"];
    f.sigma = v["sigma"];
    f.rho = v["rho"];
    f.v0 = v["v0"];
    f.season = {r.family, v["a"], v.count("b") ? v["b"] : 0.0, v.count("t0") ? v["t0"] : 0.0};
    f.pi_F = v["pi_F"];
    r.model.factors = {f};
    for (std::size_t m = 0; m < contracts; ++m) r.model.h.push_back(v["h" + std::to_string(m + 1)]);
  }
  return r;
}

void write_report_csv(std::ostream& os, const FitReport& r) {
  os << "name,value,transformed,se\n";
  for (const auto& p : r.params)
    os << p.name << ',' << g17(p.value) << ',' << g17(p.transformed) << ',' << g17(p.se) << '\n';
}

void write_ranking_csv(std::ostream& os, std::span<const RankRow> rows) {
  os << "rank,label,family,loglik,aic,bic,delta_aic,weight\n";
  char buf[256];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RankRow& r = rows[i];
    std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.2f,%.2f,%.2f,%.2f,%.4f\n", i + 1, r.label.c_str(),
                  std::string(to_string(r.family)).c_str(), r.loglik, r.aic, r.bic, r.delta_aic, r.weight);
    os << buf;
  }
}

}  // namespace seasonvol

namespace seasonvol {

void write_lr_table_csv(std::ostream& os, std::span<const FitReport> reports) {
  const FitReport* base = nullptr;
  for (const auto& r : reports)
    if (r.family == Pattern::Constant && !r.lambda_frozen) {
      if (base) fail(ErrorKind::Contract, "lr table: more than one non-seasonal free-lambda report");
      base = &r;
    }
  if (!base) fail(ErrorKind::Contract, "lr table: no non-seasonal free-lambda report");
  os << "label,family,loglik,aic,bic,D1,p1,D2,p2\n";
  char buf[320];
  for (const auto& s : reports) {
    if (s.family == Pattern::Constant || s.lambda_frozen) continue;
    const FitReport* frozen = nullptr;
    for (const auto& r : reports)
      if (r.family == s.family && r.lambda_frozen) frozen = &r;
    if (!frozen) fail(ErrorKind::Contract, "lr table: no lambda-frozen report for " + std::string(to_string(s.family)));
    const LrResult lr = lr_tests(s, *base, *frozen);
    std::snprintf(buf, sizeof buf, "%s,%s,%.2f,%.2f,%.2f,%.2f,%s,%.2f,%s\n", s.label.c_str(),
                  std::string(to_string(s.family)).c_str(), s.loglik, s.aic, s.bic, lr.d1,
                  format_pvalue(lr.p1).c_str(), lr.d2, format_pvalue(lr.p2).c_str());
    os << buf;
  }
}

}  // namespace seasonvol
