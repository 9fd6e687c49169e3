#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "published.hpp"
#include "seasonvol/data.hpp"
#include "seasonvol/errors.hpp"
#include "seasonvol/estimation.hpp"

using namespace seasonvol;
using Catch::Approx;

namespace {

std::ptrdiff_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

ModelParams random_params(std::mt19937_64& rng, Pattern family, bool lambda_free, std::size_t k) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  FactorParams f;
  f.lambda = lambda_free ? 0.05 + 2.0 * U(rng) : 0.0;
  f.kappa = 0.1 + 5.0 * U(rng);
  f.sigma = 0.05 + U(rng);
  f.rho = -0.95 + 1.9 * U(rng);
  f.v0 = 0.01 + 0.2 * U(rng);
  f.pi_F = -2.0 + 4.0 * U(rng);
  const double a = 0.01 + 0.2 * U(rng);
  const double b = family == Pattern::Constant ? 0.0 : (family == Pattern::Sinusoidal ? a * (0.05 + 0.9 * U(rng)) : 0.01 + U(rng));
  const double t0 = family == Pattern::Constant ? 0.0 : 0.02 + 0.96 * U(rng);
  f.season = {family, a, b, t0};
  ModelParams p{{f}, {}};
  for (std::size_t m = 0; m < k; ++m) p.h.push_back(1e-4 + 0.01 * U(rng));
  return p;
}

FitReport published_report(const published::Commodity& c, std::size_t col, bool frozen) {
  const Pattern p = published::kColumns[col];
  return report_from_loglik(std::string(to_string(p)) + (frozen ? "-nolambda" : ""), p, frozen,
                            frozen ? c.ll_nolambda[col] : c.ll[col], published::n_free(c, p, frozen), c.dates);
}

ModelParams truth() {
  FactorParams f;
  f.lambda = 0.4;
  f.kappa = 3.0;
  f.sigma = 0.3;
  f.rho = -0.3;
  f.v0 = 0.06;
  f.pi_F = 0.5;
  f.season = {Pattern::Sinusoidal, 0.06, 0.04, 0.4};
  return {{f}, std::vector<double>(3, 0.003)};
}

}  // namespace

TEST_CASE("parameter transforms match the published transformed values") {
  FactorParams f = truth().factors[0];
  f.kappa = 1.5624;
  f.lambda = 0.2122;
  const ModelParams p{{f}, {0.01, 0.01}};
  const ParamLayout layout{Pattern::Sinusoidal, true, 2};
  const Eigen::VectorXd x = to_unconstrained(p, layout);
  const auto names = layout.names();
  // Both columns are printed to four decimals.
  auto margin = [](double value) { return 0.5e-4 / value + 0.5e-4; };
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "kappa") CHECK(x(i) == Approx(0.4462).margin(margin(1.5624)));
    if (names[i] == "lambda") CHECK(x(i) == Approx(-1.5503).margin(margin(0.2122)));
  }
}

TEST_CASE("parameter transforms round-trip") {
  std::mt19937_64 rng(17);
  for (Pattern fam : published::kColumns)
    for (bool lambda_free : {true, false})
      for (int i = 0; i < 25; ++i) {
        const ParamLayout layout{fam, lambda_free, 3};
        const ModelParams p = random_params(rng, fam, lambda_free, 3);
        const Eigen::VectorXd x = to_unconstrained(p, layout);
        REQUIRE(static_cast<std::size_t>(x.size()) == layout.size());
        const ModelParams q = from_unconstrained(x, layout);
        const FactorParams &a = p.factors[0], &b = q.factors[0];
        INFO(to_string(fam) << " lambda_free=" << lambda_free);
        CHECK(b.lambda == Approx(a.lambda).epsilon(1e-12).margin(1e-15));
        CHECK(b.kappa == Approx(a.kappa).epsilon(1e-12));
        CHECK(b.sigma == Approx(a.sigma).epsilon(1e-12));
        CHECK(b.rho == Approx(a.rho).epsilon(1e-12));
        CHECK(b.v0 == Approx(a.v0).epsilon(1e-12));
        CHECK(b.pi_F == Approx(a.pi_F).epsilon(1e-12));
        CHECK(b.season.a == Approx(a.season.a).epsilon(1e-12));
        CHECK(b.season.b == Approx(a.season.b).epsilon(1e-12).margin(1e-15));
        CHECK(b.season.t0 == Approx(a.season.t0).epsilon(1e-12).margin(1e-15));
        for (std::size_t m = 0; m < 3; ++m) CHECK(q.h[m] == Approx(p.h[m]).epsilon(1e-12));
      }
}

TEST_CASE("unconstrained coordinates always map to admissible parameters") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N(0.0, 3.0);
  const ParamLayout layout{Pattern::Sinusoidal, true, 2};
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(layout.size(), [&] { return N(rng); });
    const ModelParams p = from_unconstrained(x, layout);
    const FactorParams& f = p.factors[0];
    CHECK(std::abs(f.rho) < 1.0);
    CHECK(f.season.b <= f.season.a);
    CHECK(f.season.t0 > 0.0);
    CHECK(f.season.t0 < 1.0);
    CHECK(f.pi_v == 0.0);
  }
}

TEST_CASE("information criteria") {
  CHECK(aic(102484.74, 19) == Approx(-204931.48).margin(1e-9));
  CHECK(bic(102484.74, 19, 2529) == Approx(-204820.6).margin(0.01));
  const FitReport r = report_from_loglik("x", Pattern::Constant, false, 10.0, 3, 100);
  CHECK(r.aic == Approx(2 * 3 - 20.0));
  CHECK(r.bic == Approx(3 * std::log(100.0) - 20.0));
}

TEST_CASE("chi-square survival function") {
  CHECK(chi2_sf(0.0, 2) == 1.0);
  CHECK(chi2_sf(9.2103, 2) == Approx(0.01).epsilon(1e-4));
  CHECK(chi2_sf(6.6349, 1) == Approx(0.01).epsilon(1e-4));
  CHECK(chi2_sf(15.1367, 1) == Approx(1e-4).epsilon(1e-3));
  CHECK(chi2_sf(4608.43, 1) < 1e-300);
}

TEST_CASE("published summary table arithmetic") {
  for (const auto& c : published::kTable) {
    std::vector<FitReport> free, frozen;
    for (std::size_t col = 0; col < 6; ++col) {
      free.push_back(published_report(c, col, false));
      frozen.push_back(published_report(c, col, true));
    }
    for (std::size_t col = 0; col < 6; ++col) {
      INFO(c.name << " column " << col);
      CHECK(free[col].aic == Approx(c.aic[col]).margin(0.02));
      CHECK(free[col].bic == Approx(c.bic[col]).margin(0.02));
      CHECK(2 * (free[col].loglik - frozen[col].loglik) == Approx(c.d2[col]).margin(0.05));
      if (col == 5) continue;
      const LrResult lr = lr_tests(free[col], free[5], frozen[col]);
      CHECK(lr.d1 == Approx(c.d1[col]).margin(0.05));
      CHECK(lr.d2 == Approx(c.d2[col]).margin(0.05));
      CHECK(format_pvalue(lr.p1) == format_pvalue(c.p1[col]));
      CHECK(format_pvalue(lr.p2) == "0.0000");
    }
    const auto rows = rank_models(free);
    for (const auto& row : rows) {
      const std::size_t col = static_cast<std::size_t>(
          std::find(published::kColumns.begin(), published::kColumns.end(), row.family) - published::kColumns.begin());
      INFO(c.name << " " << row.label);
      CHECK(row.delta_aic == Approx(c.delta_aic[col]).margin(0.03));
    }
  }
}

TEST_CASE("likelihood-ratio tests reject non-nested inputs") {
  const auto& c = published::kTable[0];
  const FitReport s = published_report(c, 0, false), n = published_report(c, 5, false),
                  z = published_report(c, 0, true), z2 = published_report(c, 1, true);
  CHECK_NOTHROW(lr_tests(s, n, z));
  CHECK_THROWS_AS(lr_tests(n, s, z), Error);
  CHECK_THROWS_AS(lr_tests(s, n, z2), Error);
  FitReport other = n;
  other.n_dates = 2000;
  CHECK_THROWS_AS(lr_tests(s, other, z), Error);
  try {
    lr_tests(s, s, z);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
  }
  FitReport same = n;
  same.loglik = s.loglik;
  FitReport same_z = z;
  same_z.loglik = s.loglik;
  const LrResult lr = lr_tests(s, same, same_z);
  CHECK(lr.d1 == 0.0);
  CHECK(lr.p1 == 1.0);
  CHECK(lr.p2 == 1.0);
}

TEST_CASE("ranking by AIC") {
  const auto& c = published::kTable[3];
  std::vector<FitReport> rs;
  for (std::size_t col = 0; col < 6; ++col) rs.push_back(published_report(c, col, false));
  const auto rows = rank_models(rs);
  REQUIRE(rows.size() == 6);
  CHECK(rows.front().delta_aic == 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    total += rows[i].weight;
    if (i > 0) CHECK(rows[i].aic >= rows[i - 1].aic);
    if (i > 0) CHECK(rows[i].weight <= rows[i - 1].weight);
    CHECK(rows[i].weight == Approx(std::exp(-0.5 * rows[i].delta_aic) / std::exp(-0.5 * rows[0].delta_aic) * rows[0].weight));
  }
  CHECK(total == Approx(1.0));
  std::vector<FitReport> tie{rs[0], rs[0]};
  tie[1].label = "copy";
  const auto t = rank_models(tie);
  CHECK(t[0].weight == Approx(0.5));
  CHECK(t[0].label == rs[0].label);
}

TEST_CASE("table writers") {
  const auto& c = published::kTable[0];
  std::vector<FitReport> rs;
  for (std::size_t col = 0; col < 6; ++col) {
    rs.push_back(published_report(c, col, false));
    rs.push_back(published_report(c, col, true));
  }
  std::ostringstream lr;
  write_lr_table_csv(lr, rs);
  CHECK(lr.str().rfind("label,family,loglik,aic,bic,D1,p1,D2,p2\n", 0) == 0);
  CHECK(lr.str().find("sinusoidal,sinusoidal,102465.71,-204893.42,-204782.54,24.02,0.0000,4608.44,0.0000\n") !=
        std::string::npos);
  CHECK(lines(lr.str()) == 6);

  std::vector<FitReport> two{rs[0], rs[0]};
  std::ostringstream bad;
  CHECK_THROWS_AS(write_lr_table_csv(bad, two), Error);

  std::ostringstream rk;
  const auto rows = rank_models(std::span(rs).first(2));
  write_ranking_csv(rk, rows);
  CHECK(rk.str().rfind("rank,label,family,loglik,aic,bic,delta_aic,weight\n1,sinusoidal,", 0) == 0);
}

TEST_CASE("reports round-trip through text") {
  const ModelParams p = truth();
  SyntheticPanelSpec spec;
  spec.dates = 150;
  spec.slots = 3;
  const ObservationSeries obs = to_returns(synthetic_panel(p, spec));
  FitReport r = evaluate(obs, p, false);
  r.label = "truth";
  r.seed = 12345678901234ULL;
  CHECK(r.loglik == Approx(loglik(obs, p)).epsilon(1e-12));
  std::stringstream ss;
  write_report(ss, r);
  const FitReport q = parse_report(ss);
  CHECK(q.label == r.label);
  CHECK(q.family == r.family);
  CHECK(q.n_dates == r.n_dates);
  CHECK(q.n_free == r.n_free);
  CHECK(q.loglik == r.loglik);
  CHECK(q.aic == r.aic);
  CHECK(q.seed == r.seed);
  REQUIRE(q.params.size() == r.params.size());
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    CHECK(q.params[i].name == r.params[i].name);
    CHECK(q.params[i].value == r.params[i].value);
  }
  CHECK(loglik(obs, q.model) == r.loglik);

  std::istringstream broken("family = sinusoidal\nloglik 3\n");
  CHECK_THROWS_AS(parse_report(broken), Error);
  std::istringstream missing("family = sinusoidal\nloglik = 3\n");
  CHECK_THROWS_AS(parse_report(missing), Error);
}

TEST_CASE("short fits are reproducible and thread-count independent") {
  const ModelParams p = truth();
  SyntheticPanelSpec spec;
  spec.dates = 200;
  spec.slots = 3;
  spec.seed = 8;
  const ObservationSeries obs = to_returns(synthetic_panel(p, spec));
  FitOptions opt;
  opt.seed = 5;
  opt.anneal.restarts = 2;
  opt.anneal.max_stages = 2;
  opt.anneal.trials_per_dim = 3;
  opt.polish = false;
  const FitReport a = fit(obs, Pattern::Sinusoidal, false, opt);
  opt.threads = 2;
  const FitReport b = fit(obs, Pattern::Sinusoidal, false, opt);
  CHECK(a.loglik == b.loglik);
  CHECK(a.evaluations == b.evaluations);
  for (std::size_t i = 0; i < a.params.size(); ++i) CHECK(a.params[i].value == b.params[i].value);
  CHECK(a.n_free == 12);
  CHECK(a.loglik >= evaluate(obs, initial_guess(obs, Pattern::Sinusoidal, false), false).loglik);

  const FitReport z = fit(obs, Pattern::Sinusoidal, true, opt);
  CHECK(z.lambda_frozen);
  CHECK(z.n_free == 11);
  CHECK(z.model.factors[0].lambda == 0.0);
}
