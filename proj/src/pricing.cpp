#include "seasonvol/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "seasonvol/cir_process.hpp"
#include "seasonvol/errors.hpp"
#include "seasonvol/quadrature.hpp"

namespace seasonvol {

namespace {

constexpr cplx I{0.0, 1.0};

// Panels start narrow (the damped transform has poles close to the real
// axis) and grow to two units of 1/sd, which keeps the phase e^{-iuk}
// resolved for strikes within a few standard deviations.
double panel_width(double lo, double scale) { return std::min(0.25 + lo, 2.0 * scale); }

// 1/sd of the log-return along direction (1, -δ), from the curvature of ln φ at 0.
double inverse_sd(const CfEngine& eng, double delta) {
  const double h = 1e-3;
  const double lp = eng.log_cf(h, -delta * h).real();
  const double lm = eng.log_cf(-h, delta * h).real();
  const double var = -(lp + lm) / (h * h);
  return 1.0 / std::sqrt(std::max(var, 1e-8));
}

}  // namespace

VanillaPricer::VanillaPricer(std::vector<FactorParams> factors, double T, double Tm, double F0, double r,
                             PricingOptions opt)
    : engine_(std::move(factors), T, Tm, Tm, opt.cf), T_(T), F0_(F0), r_(r), opt_(opt) {
  require(T > 0.0, ErrorKind::Domain, "vanilla pricing: requires T > 0");
  require(F0 > 0.0 && std::isfinite(F0), ErrorKind::Domain, "vanilla pricing: requires F0 > 0");
  require(opt.alpha > 0.0, ErrorKind::Domain, "vanilla pricing: damping must be > 0");
}

const VanillaPricer::Nodes& VanillaPricer::nodes(int side) const {
  std::call_once(once_[side], [&] {
    Nodes& nd = nodes_[side];
    const double a = side == 0 ? opt_.alpha : -opt_.alpha;
    const auto& gl = quad::gauss_legendre(opt_.order);
    const double scale = inverse_sd(engine_, 0.0);
    double lo = 0.0;
    while (true) {
      if (lo >= opt_.max_u * scale)
        fail(ErrorKind::Numerical, "vanilla pricing: Fourier integral did not decay below the cutoff");
      const double hi = lo + panel_width(lo, scale);
      double panel_max = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
        const cplx phi = engine_(u - (a + 1.0) * I, 0.0);
        const cplx psi = phi / cplx(a * a + a - u * u, (2.0 * a + 1.0) * u);
        if (!std::isfinite(psi.real()) || !std::isfinite(psi.imag()))
          fail(ErrorKind::Numerical, "vanilla pricing: non-finite transform value");
        nd.u.push_back(u);
        nd.w.push_back(0.5 * (hi - lo) * gl.weights[i]);
        nd.psi.push_back(psi);
        panel_max = std::max(panel_max, std::abs(psi));
      }
      lo = hi;
      if (panel_max < opt_.cutoff) break;
    }
  });
  return nodes_[side];
}

double VanillaPricer::otm_normalized(double k, int side) const {
  const Nodes& nd = nodes(side);
  const double a = side == 0 ? opt_.alpha : -opt_.alpha;
  double s = 0.0;
  for (std::size_t i = 0; i < nd.u.size(); ++i) s += nd.w[i] * (std::exp(-I * nd.u[i] * k) * nd.psi[i]).real();
  return std::max(0.0, std::exp(-a * k) * s / std::numbers::pi);
}

double VanillaPricer::call(double K) const {
  require(K > 0.0 && std::isfinite(K), ErrorKind::Domain, "vanilla pricing: requires K > 0");
  const double k = std::log(K / F0_);
  const double df = std::exp(-r_ * T_);
  if (k >= 0.0) return df * F0_ * otm_normalized(k, 0);
  return df * F0_ * otm_normalized(k, 1) + df * (F0_ - K);
}

double VanillaPricer::put(double K) const {
  require(K > 0.0 && std::isfinite(K), ErrorKind::Domain, "vanilla pricing: requires K > 0");
  const double k = std::log(K / F0_);
  const double df = std::exp(-r_ * T_);
  if (k < 0.0) return df * F0_ * otm_normalized(k, 1);
  return df * F0_ * otm_normalized(k, 0) - df * (F0_ - K);
}

double price_european(const VanillaSpec& spec, std::span<const FactorParams> factors, double F0,
                      const PricingOptions& opt) {
  require(spec.Tm >= spec.T, ErrorKind::Domain, "vanilla pricing: futures maturity precedes expiry");
  const VanillaPricer pricer({factors.begin(), factors.end()}, spec.T, spec.Tm, F0, spec.r, opt);
  return pricer.price(spec.K, spec.call);
}

namespace {

// Transformed joint CF values along the line (u, -δu) for the three tilts
// (none, by F1, by F2), on a truncated Gauss–Legendre node set.
struct SpreadNodes {
  std::vector<double> u, w;
  std::vector<cplx> g0, g1, g2;
  bool ok = true;
};

SpreadNodes spread_nodes(const CfEngine& eng, double delta, const PricingOptions& opt) {
  SpreadNodes nd;
  const auto& gl = quad::gauss_legendre(opt.order);
  const double scale = inverse_sd(eng, delta);
  double lo = 0.0;
  while (true) {
    if (lo >= opt.max_u * scale) {
      nd.ok = false;
      return nd;
    }
    const double hi = lo + panel_width(lo, scale);
    double panel_max = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
      const cplx g0 = eng(u, -delta * u);
      const cplx g1 = eng(u - I, -delta * u);
      const cplx g2 = eng(u, -delta * u - I);
      for (const cplx& g : {g0, g1, g2}) {
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
          nd.ok = false;
          return nd;
        }
        panel_max = std::max(panel_max, std::abs(g) / u);
      }
      nd.u.push_back(u);
      nd.w.push_back(0.5 * (hi - lo) * gl.weights[i]);
      nd.g0.push_back(g0);
      nd.g1.push_back(g1);
      nd.g2.push_back(g2);
    }
    lo = hi;
    if (panel_max < opt.cutoff) break;
  }
  return nd;
}

// P(Z > kc) under the three measures, Z centred so that kc = k - (ln F1 - δ ln F2).
void exceedance(const SpreadNodes& nd, double kc, double& p0, double& p1, double& p2) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < nd.u.size(); ++i) {
    const cplx e = std::exp(-I * nd.u[i] * kc) / (I * nd.u[i]);
    s0 += nd.w[i] * (e * nd.g0[i]).real();
    s1 += nd.w[i] * (e * nd.g1[i]).real();
    s2 += nd.w[i] * (e * nd.g2[i]).real();
  }
  auto clip = [](double p) { return std::clamp(p, 0.0, 1.0); };
  p0 = clip(0.5 + s0 / std::numbers::pi);
  p1 = clip(0.5 + s1 / std::numbers::pi);
  p2 = clip(0.5 + s2 / std::numbers::pi);
}

SpreadResult spread_monte_carlo(const SpreadSpec& spec, std::span<const FactorParams> factors, double F1,
                                double F2, const PricingOptions& opt) {
  const double mats[] = {spec.T1, spec.T2};
  const double lf0[] = {std::log(F1), std::log(F2)};
  SimConfig cfg;
  cfg.horizon = spec.T;
  cfg.steps = opt.mc_steps;
  cfg.n_paths = opt.mc_paths;
  cfg.seed = opt.mc_seed;
  cfg.threads = opt.threads;
  const TerminalSample ts = simulate_terminal(factors, mats, lf0, cfg);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t p = 0; p < ts.n_paths; ++p) {
    const double pay = std::max(std::exp(ts.logF[2 * p]) - std::exp(ts.logF[2 * p + 1]) - spec.K, 0.0);
    sum += pay;
    sum2 += pay * pay;
  }
  const double n = static_cast<double>(ts.n_paths);
  const double mean = sum / n;
  const double df = std::exp(-spec.r * spec.T);
  SpreadResult res;
  res.method = "monte-carlo";
  res.price = df * mean;
  res.mc_stderr = df * std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / std::max(n - 1.0, 1.0));
  return res;
}

}  // namespace

SpreadResult price_calendar_spread(const SpreadSpec& spec, std::span<const FactorParams> factors, double F0_1,
                                   double F0_2, const PricingOptions& opt) {
  require(spec.T > 0.0, ErrorKind::Domain, "spread pricing: requires T > 0");
  require(spec.T <= std::min(spec.T1, spec.T2), ErrorKind::Domain, "spread pricing: requires T <= min(T1, T2)");
  require(F0_1 > 0.0 && F0_2 > 0.0, ErrorKind::Domain, "spread pricing: initial prices must be > 0");
  const double df = std::exp(-spec.r * spec.T);
  const double forward = df * (F0_1 - F0_2 - spec.K);

  if (spec.T1 == spec.T2) {
    // Both legs follow the same contract: (cF1 - K)^+ with c = 1 - F2/F1.
    SpreadResult res;
    res.method = "vanilla";
    const double c = (F0_1 - F0_2) / F0_1;
    if (c == 0.0) {
      res.price = df * std::max(-spec.K, 0.0);
    } else if (c > 0.0) {
      if (spec.K <= 0.0) {
        res.price = forward;
      } else {
        const VanillaPricer vp({factors.begin(), factors.end()}, spec.T, spec.T1, F0_1, spec.r, opt);
        res.price = c * vp.call(spec.K / c);
      }
    } else {
      if (spec.K >= 0.0) {
        res.price = 0.0;
      } else {
        const VanillaPricer vp({factors.begin(), factors.end()}, spec.T, spec.T1, F0_1, spec.r, opt);
        res.price = -c * vp.put(spec.K / c);
      }
    }
    return res;
  }

  const CfEngine eng({factors.begin(), factors.end()}, spec.T, spec.T1, spec.T2, opt.cf);
  const double l1 = std::log(F0_1), l2 = std::log(F0_2);
  const bool regular = F0_2 + spec.K > 0.0;
  const double delta0 = regular ? F0_2 / (F0_2 + spec.K) : 1.0;

  struct Best {
    double lb = -std::numeric_limits<double>::infinity();
    double delta = 0.0, k = 0.0;
  } best;
  bool any_ok = false;

  // For fixed δ, the CF values are shared by every k; optimize k on them.
  auto best_for_delta = [&](double delta) {
    const SpreadNodes nd = spread_nodes(eng, delta, opt);
    if (!nd.ok) return -std::numeric_limits<double>::max();
    any_ok = true;
    const double centre = l1 - delta * l2;
    const double sd = 1.0 / inverse_sd(eng, delta);
    const double k0 = regular ? std::log(F0_2 + spec.K) - delta * l2 : centre - 3.0 * sd;
    auto lb = [&](double k) {
      double p0, p1, p2;
      exceedance(nd, k - centre, p0, p1, p2);
      return df * (F0_1 * p1 - F0_2 * p2 - spec.K * p0);
    };
    const auto r = boost::math::tools::brent_find_minima([&](double k) { return -lb(k); }, k0 - 6.0 * sd,
                                                         k0 + 6.0 * sd, 40);
    const double val = -r.second;
    if (std::isfinite(val) && val > best.lb) best = {val, delta, r.first};
    return std::isfinite(val) ? val : -std::numeric_limits<double>::max();
  };

  const double dlo = std::max(0.0, delta0 - 0.5), dhi = delta0 + 0.5;
  std::uintmax_t max_iter = 25;
  boost::math::tools::brent_find_minima([&](double d) { return -best_for_delta(d); }, dlo, dhi, 20, max_iter);
  if (!any_ok || !std::isfinite(best.lb)) return spread_monte_carlo(spec, factors, F0_1, F0_2, opt);

  SpreadResult res;
  res.method = "lower-bound";
  res.price = best.lb;
  res.delta = best.delta;
  res.k = best.k;
  if (forward > res.price) {
    res.price = forward;
    res.method = "forward";
  }
  res.price = std::max(res.price, 0.0);
  return res;
}

}  // namespace seasonvol
