#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "seasonvol/charfn.hpp"
#include "seasonvol/errors.hpp"

using namespace seasonvol;
using Catch::Approx;

namespace {

FactorParams factor(Pattern p = Pattern::Sinusoidal) {
  FactorParams f;
  f.lambda = 0.3;
  f.kappa = 1.5;
  f.sigma = 0.3;
  f.rho = -0.3;
  f.v0 = 0.08;
  f.season = {p, 0.06, 0.04, 0.45};
  return f;
}

FactorParams random_factor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  const Pattern pats[] = {Pattern::Sinusoidal, Pattern::ExpSinusoidal, Pattern::Sawtooth, Pattern::Triangle,
                          Pattern::Spiked, Pattern::Constant};
  FactorParams f;
  f.lambda = 2 * U(rng);
  f.kappa = 0.2 + 4 * U(rng);
  f.sigma = 0.05 + 0.8 * U(rng);
  f.rho = 1.8 * U(rng) - 0.9;
  f.v0 = 0.01 + 0.2 * U(rng);
  f.season.pattern = pats[rng() % 6];
  f.season.a = 0.01 + 0.2 * U(rng);
  f.season.b = f.season.pattern == Pattern::Sinusoidal ? f.season.a * U(rng) : 0.01 + 0.3 * U(rng);
  if (f.season.pattern == Pattern::Constant) f.season.b = 0.0;
  f.season.t0 = 0.99 * U(rng);
  return f;
}

}  // namespace

TEST_CASE("cf is one at the origin and the futures are martingales") {
  const std::vector<FactorParams> fs{factor()};
  const CfEngine eng(fs, 0.5, 0.75, 1.0);
  CHECK(std::abs(eng({0, 0}, {0, 0}) - 1.0) < 1e-14);
  CHECK(std::abs(eng({0, -1}, {0, 0}) - 1.0) < 1e-10);
  CHECK(std::abs(eng({0, 0}, {0, -1}) - 1.0) < 1e-10);
  for (double u : {0.3, 1.0, 5.0, 20.0}) CHECK(std::abs(eng(u, -0.5 * u)) <= 1.0 + 1e-12);
}

TEST_CASE("constant level without damping reduces to Heston") {
  for (double rho : {-0.7, 0.0, 0.5}) {
    FactorParams f = factor(Pattern::Constant);
    f.lambda = 0.0;
    f.rho = rho;
    f.season.b = 0.0;
    const std::vector<FactorParams> fs{f};
    for (double u : {0.5, 1.7, 4.0, 11.0}) {
      const cplx ref = oracle::heston_cf(u, f.kappa, f.season.a, f.sigma, rho, f.v0, 0.8);
      const cplx got = single_cf(fs, u, 0.8, 1.5);
      INFO("rho=" << rho << " u=" << u);
      CHECK(std::abs(got - ref) < 1e-10);
    }
  }
}

TEST_CASE("joint cf is symmetric in its legs") {
  const std::vector<FactorParams> fs{factor(Pattern::Triangle)};
  const cplx a = joint_cf(fs, 0.7, -1.3, 0.4, 0.6, 1.1);
  const cplx b = joint_cf(fs, -1.3, 0.7, 0.4, 1.1, 0.6);
  CHECK(std::abs(a - b) < 1e-12);
  CHECK(std::abs(joint_cf(fs, 0.7, 0.0, 0.4, 0.6, 1.1) - single_cf(fs, 0.7, 0.4, 0.6)) < 1e-14);
}

TEST_CASE("two factors multiply") {
  const FactorParams f1 = factor(Pattern::Sinusoidal), f2 = factor(Pattern::Spiked);
  const std::vector<FactorParams> both{f1, f2}, one{f1}, two{f2};
  const cplx u1(1.1, 0.2), u2(-0.4, 0.0);
  CHECK(std::abs(joint_cf(both, u1, u2, 0.5, 0.7, 0.9) -
                 joint_cf(one, u1, u2, 0.5, 0.7, 0.9) * joint_cf(two, u1, u2, 0.5, 0.7, 0.9)) < 1e-13);
}

TEST_CASE("Riccati residual is small for random parameters") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 25; ++i) {
    const FactorParams f = random_factor(rng);
    const double T = 0.05 + 2.0 * std::abs(U(rng)) / 3;
    const double r = riccati_residual(f, U(rng), U(rng), T, T + 0.3, T + 0.8);
    INFO("draw " << i);
    CHECK(r <= 1e-8);
  }
}

TEST_CASE("A does not depend on the seasonality") {
  std::vector<FactorParams> a{factor(Pattern::Sinusoidal)}, b{factor(Pattern::Sawtooth)};
  b[0].season = {Pattern::Sawtooth, 0.2, 0.1, 0.7};
  const CfEngine ea(a, 0.6, 0.9, 1.2), eb(b, 0.6, 0.9, 1.2);
  const FactorOde sa = ea.solve(0, 1.3, -0.8), sb = eb.solve(0, 1.3, -0.8);
  CHECK(sa.A == sb.A);
  CHECK(sa.t == sb.t);
  CHECK(sa.B0 != sb.B0);
}

TEST_CASE("B by quadrature agrees with direct ODE integration") {
  for (Pattern p : {Pattern::Sinusoidal, Pattern::ExpSinusoidal, Pattern::Sawtooth, Pattern::Triangle,
                    Pattern::Spiked}) {
    const FactorParams f = factor(p);
    const std::vector<FactorParams> fs{f};
    const CfEngine eng(fs, 1.3, 1.6, 2.0);
    const cplx q = eng.solve(0, 2.0, -1.0).B0;
    const cplx o = b_by_ode(f, 2.0, -1.0, 1.3, 1.6, 2.0);
    INFO(to_string(p));
    CHECK(std::abs(q - o) < 1e-10 * std::max(1.0, std::abs(o)));
  }
}

TEST_CASE("cf agrees with Monte Carlo") {
  const std::vector<FactorParams> fs{factor()};
  const std::vector<std::pair<double, double>> u{{1.0, 0.0}, {2.5, 0.0}, {1.5, -1.0}, {0.0, 3.0}};
  const auto mc = oracle::cf_mc(fs, u, 0.5, 0.75, 1.0, 40000, 250, 21);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const cplx phi = joint_cf(fs, u[k].first, u[k].second, 0.5, 0.75, 1.0);
    INFO("u=(" << u[k].first << "," << u[k].second << ")");
    CHECK(std::abs(phi.real() - mc[k].mean.real()) < 4 * mc[k].se_re + 1e-3);
    CHECK(std::abs(phi.imag() - mc[k].mean.imag()) < 4 * mc[k].se_im + 1e-3);
  }
}

TEST_CASE("single cf with a futures level and domain checks") {
  const std::vector<FactorParams> fs{factor()};
  const cplx a = single_cf(fs, 1.2, 0.5, 1.0);
  const cplx b = single_cf(fs, 1.2, 0.5, 1.0, 50.0);
  CHECK(std::abs(b - a * std::exp(cplx(0, 1.2 * std::log(50.0)))) < 1e-14);
  CHECK_THROWS_AS(single_cf(fs, 1.0, 1.5, 1.0), Error);
  CHECK_THROWS_AS(single_cf(fs, 1.0, 0.5, 1.0, -1.0), Error);
  CHECK_THROWS_AS(CfEngine({}, 0.5, 1.0, 1.0), Error);
}

TEST_CASE("transform cache returns the uncached value") {
  clear_transform_cache();
  const SeasonalitySpec s{Pattern::Spiked, 0.1, 0.2, 0.3};
  const double v = cached_transform(s, 1.7, 0.4);
  CHECK(v == transform_theta(s, 1.7, 0.4));
  CHECK(cached_transform(s, 1.7, 0.4) == v);
  CHECK(transform_cache_size() == 1);
  cached_transform(s, 1.8, 0.4);
  CHECK(transform_cache_size() == 2);
}
