#include "seasonvol/cir_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "seasonvol/errors.hpp"

namespace seasonvol {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ path) ^ (stream * 0xd1b54a32d192ed03ULL));
}

std::vector<double> simulation_grid(std::span<const FactorParams> factors, double horizon,
                                    std::size_t steps) {
  require(steps >= 1, ErrorKind::Domain, "simulation: steps must be >= 1");
  require(horizon > 0.0, ErrorKind::Domain, "simulation: horizon must be > 0");
  std::vector<double> grid(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n)
    grid[n] = horizon * static_cast<double>(n) / static_cast<double>(steps);
  const double min_gap = 1e-9 * horizon;
  for (const auto& f : factors)
    for (double jump : discontinuities(f.season, 0.0, horizon)) {
      auto it = std::lower_bound(grid.begin(), grid.end(), jump);
      const bool near_prev = it != grid.begin() && jump - *(it - 1) < min_gap;
      const bool near_next = it != grid.end() && *it - jump < min_gap;
      if (near_prev)
        *(it - 1) = jump;
      else if (near_next)
        *it = jump;
      else
        grid.insert(it, jump);
    }
  grid.front() = 0.0;
  grid.back() = horizon;
  return grid;
}

namespace {

struct Context {
  std::span<const FactorParams> factors;
  std::span<const double> maturities;
  std::vector<double> log_f0;
  std::vector<double> grid;
  std::vector<std::vector<double>> theta_mid;  // [factor][step]
  Measure measure;
  std::uint64_t seed;
};

Context make_context(std::span<const FactorParams> factors, std::span<const double> maturities,
                     std::span<const double> log_f0, const SimConfig& cfg) {
  require(!factors.empty(), ErrorKind::Domain, "simulation: at least one factor required");
  for (const auto& f : factors) validate(f);
  for (double T : maturities)
    require(cfg.horizon <= T + 1e-12, ErrorKind::Domain, "simulation: horizon exceeds a contract maturity");
  require(log_f0.empty() || log_f0.size() == maturities.size(), ErrorKind::Domain,
          "simulation: initial curve size must match maturities");
  Context ctx{factors, maturities, {}, simulation_grid(factors, cfg.horizon, cfg.steps), {}, cfg.measure,
              cfg.seed};
  ctx.log_f0.assign(maturities.size(), 0.0);
  if (!log_f0.empty()) std::copy(log_f0.begin(), log_f0.end(), ctx.log_f0.begin());
  ctx.theta_mid.resize(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    auto& th = ctx.theta_mid[j];
    th.resize(ctx.grid.size() - 1);
    // Midpoint evaluation keeps a jump at a grid node on the correct side.
    for (std::size_t n = 0; n + 1 < ctx.grid.size(); ++n)
      th[n] = detail::theta_unchecked(factors[j].season, 0.5 * (ctx.grid[n] + ctx.grid[n + 1]));
  }
  return ctx;
}

struct PathState {
  std::vector<double> v;       // effective (truncated) variance per factor
  std::vector<double> raw_v;   // Euler variable, may dip below zero
  std::vector<double> logF;
  std::vector<double> int_v;
  double min_v = std::numeric_limits<double>::infinity();
};

// Runs one path; `on_step(n, state)` is called at n = 0 and after every step.
template <class OnStep>
void run_path(const Context& ctx, std::size_t path, OnStep&& on_step) {
  const std::size_t nf = ctx.factors.size();
  const std::size_t nc = ctx.maturities.size();
  std::vector<std::mt19937_64> engines;
  engines.reserve(nf);
  for (std::size_t j = 0; j < nf; ++j) engines.emplace_back(stream_seed(ctx.seed, path, j));
  std::normal_distribution<double> normal;

  PathState st;
  st.raw_v.resize(nf);
  st.v.resize(nf);
  st.int_v.assign(nf, 0.0);
  for (std::size_t j = 0; j < nf; ++j) st.raw_v[j] = st.v[j] = ctx.factors[j].v0;
  st.logF = ctx.log_f0;
  st.min_v = *std::min_element(st.v.begin(), st.v.end());
  on_step(0, st);

  const bool physical = ctx.measure == Measure::Physical;
  for (std::size_t n = 0; n + 1 < ctx.grid.size(); ++n) {
    const double t = ctx.grid[n];
    const double dt = ctx.grid[n + 1] - t;
    const double sdt = std::sqrt(dt);
    for (std::size_t j = 0; j < nf; ++j) {
      const FactorParams& f = ctx.factors[j];
      const double z1 = normal(engines[j]);
      const double z2 = f.rho * z1 + std::sqrt(1.0 - f.rho * f.rho) * normal(engines[j]);
      const double vp = std::max(st.raw_v[j], 0.0);
      const double sv = std::sqrt(vp);
      for (std::size_t m = 0; m < nc; ++m) {
        const double load = std::exp(-f.lambda * (ctx.maturities[m] - t));
        double drift = -0.5 * load * load * vp * dt;
        if (physical) drift += f.pi_F * load * vp * dt;
        st.logF[m] += drift + load * sv * sdt * z1;
      }
      double dv = f.kappa * (ctx.theta_mid[j][n] - vp) * dt + f.sigma * sv * sdt * z2;
      if (physical) dv += f.sigma * f.pi_v * vp * dt;
      st.raw_v[j] += dv;
      st.int_v[j] += vp * dt;
      st.v[j] = std::max(st.raw_v[j], 0.0);
      st.min_v = std::min(st.min_v, st.v[j]);
    }
    on_step(n + 1, st);
  }
}

template <class Fn>
void parallel_paths(std::size_t n_paths, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_paths)));
  if (workers == 1) {
    for (std::size_t p = 0; p < n_paths; ++p) fn(p);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n_paths + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n_paths, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t p = lo; p < hi; ++p) fn(p);
    });
  }
}

}  // namespace

std::vector<SimPath> simulate(std::span<const FactorParams> factors, std::span<const double> maturities,
                              std::span<const double> log_f0, const SimConfig& cfg) {
  const Context ctx = make_context(factors, maturities, log_f0, cfg);
  const std::size_t steps = ctx.grid.size();
  std::vector<SimPath> out(cfg.n_paths);
  parallel_paths(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    SimPath& sp = out[p];
    sp.times = ctx.grid;
    sp.measure = cfg.measure;
    sp.v.assign(factors.size(), std::vector<double>(steps));
    sp.logF.assign(maturities.size(), std::vector<double>(steps));
    run_path(ctx, p, [&](std::size_t n, const PathState& st) {
      for (std::size_t j = 0; j < st.v.size(); ++j) sp.v[j][n] = st.v[j];
      for (std::size_t m = 0; m < st.logF.size(); ++m) sp.logF[m][n] = st.logF[m];
    });
  });
  return out;
}

TerminalSample simulate_terminal(std::span<const FactorParams> factors, std::span<const double> maturities,
                                 std::span<const double> log_f0, const SimConfig& cfg) {
  const Context ctx = make_context(factors, maturities, log_f0, cfg);
  const std::size_t last = ctx.grid.size() - 1;
  TerminalSample out;
  out.n_paths = cfg.n_paths;
  out.n_factors = factors.size();
  out.n_contracts = maturities.size();
  out.logF.resize(out.n_paths * out.n_contracts);
  out.v.resize(out.n_paths * out.n_factors);
  out.integrated_v.resize(out.n_paths * out.n_factors);
  out.min_v.resize(out.n_paths);
  parallel_paths(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    run_path(ctx, p, [&](std::size_t n, const PathState& st) {
      if (n != last) return;
      std::copy(st.logF.begin(), st.logF.end(), out.logF.begin() + p * out.n_contracts);
      std::copy(st.v.begin(), st.v.end(), out.v.begin() + p * out.n_factors);
      std::copy(st.int_v.begin(), st.int_v.end(), out.integrated_v.begin() + p * out.n_factors);
      out.min_v[p] = st.min_v;
    });
  });
  return out;
}

void write_paths_csv(std::ostream& os, std::span<const SimPath> paths) {
  os << "time,path_id,factor,v,contract,logF\n";
  const auto old_prec = os.precision(17);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const SimPath& sp = paths[p];
    for (std::size_t n = 0; n < sp.times.size(); ++n) {
      for (std::size_t j = 0; j < sp.v.size(); ++j)
        os << sp.times[n] << ',' << p << ',' << j << ',' << sp.v[j][n] << ",,\n";
      for (std::size_t m = 0; m < sp.logF.size(); ++m)
        os << sp.times[n] << ',' << p << ",,," << m << ',' << sp.logF[m][n] << '\n';
    }
  }
  os.precision(old_prec);
}

ComparisonReport comparison_check(const FactorParams& seasonal, double theta_min_level, double v_tilde0,
                                  double horizon, std::size_t steps, std::size_t n_paths,
                                  std::uint64_t seed, double tolerance) {
  validate(seasonal);
  require(v_tilde0 > 0.0, ErrorKind::Contract, "comparison_check: v_tilde0 must be > 0");
  require(v_tilde0 <= seasonal.v0, ErrorKind::Contract, "comparison_check: requires v_tilde0 <= v0");
  require(theta_min_level > 0.0 && theta_min_level <= theta_min(seasonal.season) + 1e-15,
          ErrorKind::Contract, "comparison_check: theta_min must bound theta(t) from below");

  const FactorParams one[] = {seasonal};
  const auto grid = simulation_grid(one, horizon, steps);
  std::vector<double> theta(grid.size() - 1);
  for (std::size_t n = 0; n + 1 < grid.size(); ++n)
    theta[n] = detail::theta_unchecked(seasonal.season, 0.5 * (grid[n] + grid[n + 1]));

  // Drift-implicit step on sqrt(v).
  const double k = seasonal.kappa, s = seasonal.sigma;
  const bool implicit = s * s < 4.0 * k * theta_min_level;
  const auto implicit_step = [&](double v, double th, double dt, double dw) {
    const double y = std::sqrt(v) + 0.5 * s * dw;
    const double c = 1.0 + 0.5 * k * dt;
    const double r = (y + std::sqrt(y * y + 2.0 * c * (k * th - 0.25 * s * s) * dt)) / (2.0 * c);
    return r * r;
  };

  ComparisonReport rep;
  rep.worst_gap = std::numeric_limits<double>::infinity();
  std::normal_distribution<double> normal;
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::mt19937_64 eng(stream_seed(seed, p, 0));
    double v = seasonal.v0;
    double vt = v_tilde0;
    bool path_bad = false;
    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
      const double dt = grid[n + 1] - grid[n];
      const double dw = std::sqrt(dt) * normal(eng);
      if (implicit) {
        v = implicit_step(v, theta[n], dt, dw);
        vt = implicit_step(vt, theta_min_level, dt, dw);
      } else {
        const double vp = std::max(v, 0.0);
        const double vtp = std::max(vt, 0.0);
        v += k * (theta[n] - vp) * dt + s * std::sqrt(vp) * dw;
        vt += k * (theta_min_level - vtp) * dt + s * std::sqrt(vtp) * dw;
      }
      const double gap = std::max(v, 0.0) - std::max(vt, 0.0);
      rep.worst_gap = std::min(rep.worst_gap, gap);
      if (gap < -tolerance) {
        ++rep.violating_steps;
        path_bad = true;
      }
    }
    if (path_bad) ++rep.violating_paths;
  }
  rep.holds = rep.violating_paths == 0;
  rep.violation_fraction = n_paths ? static_cast<double>(rep.violating_paths) / static_cast<double>(n_paths) : 0.0;
  return rep;
}

}  // namespace seasonvol
