#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "seasonvol/errors.hpp"
#include "seasonvol/pricing.hpp"

using namespace seasonvol;
using Catch::Approx;

namespace {

FactorParams factor() {
  FactorParams f;
  f.lambda = 0.3;
  f.kappa = 1.5;
  f.sigma = 0.3;
  f.rho = -0.3;
  f.v0 = 0.08;
  f.season = {Pattern::Sinusoidal, 0.06, 0.04, 0.45};
  return f;
}

struct Mc {
  double mean = 0, se = 0;
};

template <class Payoff>
Mc mc_price(const std::vector<FactorParams>& fs, std::vector<double> mats, std::vector<double> lf0, double T,
            std::size_t paths, std::uint64_t seed, Payoff pay) {
  SimConfig cfg;
  cfg.horizon = T;
  cfg.steps = 200;
  cfg.n_paths = paths;
  cfg.seed = seed;
  const auto s = simulate_terminal(fs, mats, lf0, cfg);
  double sum = 0, sum2 = 0;
  for (std::size_t p = 0; p < paths; ++p) {
    const double v = pay(&s.logF[p * mats.size()]);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(paths);
  return {sum / n, std::sqrt((sum2 / n - sum * sum / (n * n)) / n)};
}

}  // namespace

TEST_CASE("deterministic variance reproduces Black-76") {
  FactorParams f = factor();
  f.sigma = 1e-6;
  f.rho = 0.0;
  f.season = {Pattern::Constant, 0.09, 0.0, 0.0};
  f.v0 = 0.09;
  const std::vector<FactorParams> fs{f};
  const double T = 0.5, Tm = 0.8, F0 = 100, r = 0.03;
  const double var = f.v0 * (std::exp(-2 * f.lambda * (Tm - T)) - std::exp(-2 * f.lambda * Tm)) / (2 * f.lambda);
  const VanillaPricer vp(fs, T, Tm, F0, r);
  for (double K : {60.0, 85.0, 100.0, 115.0, 160.0}) {
    INFO("K=" << K);
    CHECK(vp.call(K) == Approx(oracle::black(F0, K, std::sqrt(var), std::exp(-r * T), true)).margin(1e-5));
    CHECK(vp.put(K) == Approx(oracle::black(F0, K, std::sqrt(var), std::exp(-r * T), false)).margin(1e-5));
  }
}

TEST_CASE("put-call parity, monotonicity and convexity") {
  const std::vector<FactorParams> fs{factor()};
  const double T = 0.5, F0 = 80, r = 0.02;
  const VanillaPricer vp(fs, T, 0.75, F0, r);
  double prev = 1e300, prev_slope = -1e300;
  double prevK = 0;
  for (double K = 50; K <= 120; K += 5) {
    const double c = vp.call(K), p = vp.put(K);
    CHECK(c - p == Approx(std::exp(-r * T) * (F0 - K)).margin(1e-9));
    CHECK(c <= prev);
    CHECK(c >= std::max(std::exp(-r * T) * (F0 - K), 0.0) - 1e-10);
    if (prevK > 0) {
      const double slope = (c - prev) / (K - prevK);
      CHECK(slope >= prev_slope - 1e-9);
      prev_slope = slope;
    }
    prev = c;
    prevK = K;
  }
  CHECK(price_european({100.0, T, 0.75, r, true}, fs, F0) == Approx(vp.call(100.0)).epsilon(1e-12));
}

TEST_CASE("european call agrees with Monte Carlo") {
  const std::vector<FactorParams> fs{factor()};
  const double T = 0.5, Tm = 0.75, F0 = 100;
  const VanillaPricer vp(fs, T, Tm, F0, 0.0);
  for (double K : {80.0, 100.0, 125.0}) {
    const Mc mc = mc_price(fs, {Tm}, {std::log(F0)}, T, 60000, 5,
                           [&](const double* lf) { return std::max(std::exp(lf[0]) - K, 0.0); });
    INFO("K=" << K << " model=" << vp.call(K) << " mc=" << mc.mean << " se=" << mc.se);
    CHECK(std::abs(vp.call(K) - mc.mean) < 4 * mc.se);
  }
}

TEST_CASE("domain errors") {
  const std::vector<FactorParams> fs{factor()};
  CHECK_THROWS_AS(VanillaPricer(fs, 1.0, 0.5, 100, 0), Error);
  CHECK_THROWS_AS(VanillaPricer(fs, 0.5, 1.0, -1, 0), Error);
  const VanillaPricer vp(fs, 0.5, 1.0, 100, 0);
  CHECK_THROWS_AS(vp.call(0.0), Error);
  CHECK_THROWS_AS(price_calendar_spread({1.0, 1.0, 0.5, 1.0, 0.0}, fs, 100, 100), Error);
}

TEST_CASE("spread on a single contract reduces to a vanilla") {
  const std::vector<FactorParams> fs{factor()};
  const SpreadResult r = price_calendar_spread({1.0, 0.5, 0.75, 0.75, 0.01}, fs, 100, 95);
  CHECK(r.method == "vanilla");
  const VanillaPricer vp(fs, 0.5, 0.75, 100, 0.01);
  const double c = 0.05;
  CHECK(r.price == Approx(c * vp.call(1.0 / c)).epsilon(1e-12));
  CHECK(price_calendar_spread({-2.0, 0.5, 0.75, 0.75, 0.0}, fs, 100, 100).price == Approx(2.0));
}

TEST_CASE("calendar spread lower bound agrees with Monte Carlo") {
  const std::vector<FactorParams> fs{factor()};
  const double T = 0.5, T1 = 0.75, T2 = 1.0, F1 = 100, F2 = 98;
  const double K = 1.0;
  const SpreadResult r = price_calendar_spread({K, T, T1, T2, 0.0}, fs, F1, F2);
  CHECK(r.method == "lower-bound");
  const Mc mc = mc_price(fs, {T1, T2}, {std::log(F1), std::log(F2)}, T, 100000, 13,
                         [&](const double* lf) { return std::max(std::exp(lf[0]) - std::exp(lf[1]) - K, 0.0); });
  INFO("model=" << r.price << " mc=" << mc.mean << " se=" << mc.se);
  CHECK(std::abs(r.price - mc.mean) < 4 * mc.se);
  CHECK(r.price >= std::max(F1 - F2 - K, 0.0));
}
