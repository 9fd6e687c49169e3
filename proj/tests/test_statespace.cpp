#include <catch_amalgamated.hpp>

#include "seasonvol/errors.hpp"
#include "seasonvol/statespace.hpp"

using namespace seasonvol;
using Catch::Approx;

namespace {

ModelParams params(double lambda, std::size_t k) {
  FactorParams f;
  f.lambda = lambda;
  f.kappa = 1.2;
  f.sigma = 0.4;
  f.rho = -0.25;
  f.v0 = 0.05;
  f.pi_F = 0.7;
  f.pi_v = 0.3;
  f.season = {Pattern::Sinusoidal, 0.05, 0.02, 0.2};
  return {{f}, std::vector<double>(k, 0.01)};
}

}  // namespace

TEST_CASE("log-price transition without damping") {
  const ModelParams p = params(0.0, 2);
  const double dt = 1.0 / 252;
  const std::vector<double> taus{0.5, 1.0}, s3{0.05};
  const SystemMatrices s = build_system(p, 0.3, dt, taus, ObsMode::LogPrices, s3, std::vector<double>{4.6, 4.7});
  CHECK(s.T(0, 0) == 1.0);
  CHECK(s.T(1, 1) == 1.0);
  CHECK(s.T(2, 2) == Approx(1.0 - 1.2 * dt + 0.4 * 0.3 * dt));
  CHECK(s.T(0, 2) == Approx(0.7 * dt));
  CHECK(s.T(1, 2) == Approx(dt));
  CHECK(s.d(2) == Approx(1.2 * eval_theta(p.factors[0].season, 0.3) * dt));
  CHECK(s.c(0) == 4.6);
  CHECK(s.c(1) == 4.7);
}

TEST_CASE("log-return mode removes the unit diagonal and the offsets") {
  const ModelParams p = params(0.5, 2);
  const double dt = 1.0 / 252;
  const SystemMatrices s =
      build_system(p, 0.3, dt, std::vector<double>{0.5, 1.0}, ObsMode::LogReturns, std::vector<double>{0.05},
                   std::vector<double>{4.6, 4.7});
  CHECK(s.T(0, 0) == Approx(-0.5 * dt));
  CHECK(s.T(1, 1) == Approx(-1.0 * dt));
  CHECK(s.c.isZero());
}

TEST_CASE("measurement loadings") {
  const ModelParams p = params(0.2122, 2);
  const SystemMatrices s = build_system(p, 0.0, 1.0 / 252, std::vector<double>{0.0, 1.0}, ObsMode::LogReturns,
                                        std::vector<double>{0.05});
  CHECK(s.Z(0, 0) == 1.0);
  CHECK(s.Z(0, 1) == -0.5);
  CHECK(s.Z(0, 2) == 0.0);
  CHECK(s.Z(1, 0) == Approx(std::exp(-0.2122)));
  CHECK(s.Z(1, 1) == Approx(-0.5 * std::exp(-0.4244)));
  CHECK(s.H(0, 0) == Approx(1e-4));
}

TEST_CASE("loadings decay with time to maturity") {
  const ModelParams p = params(0.4, 4);
  const SystemMatrices s = build_system(p, 0.0, 0.01, std::vector<double>{0.1, 0.4, 0.9, 2.0}, ObsMode::LogReturns,
                                        std::vector<double>{0.05});
  for (int m = 0; m + 1 < 4; ++m) CHECK(s.Z(m + 1, 0) < s.Z(m, 0));
}

TEST_CASE("innovation covariance") {
  const ModelParams p = params(0.4, 1);
  const double dt = 0.01;
  const SystemMatrices s =
      build_system(p, 0.0, dt, std::vector<double>{1.0}, ObsMode::LogReturns, std::vector<double>{0.09});
  const Eigen::MatrixXd V = s.state_cov();
  CHECK(V(0, 0) == Approx(0.09 * dt));
  CHECK(V(0, 2) == Approx(-0.25 * 0.4 * 0.09 * dt));
  CHECK(V(2, 2) == Approx(0.16 * 0.09 * dt));
  CHECK(V(1, 1) == 0.0);
  // A non-positive plug-in variance is floored.
  const SystemMatrices f =
      build_system(p, 0.0, dt, std::vector<double>{1.0}, ObsMode::LogReturns, std::vector<double>{-1.0});
  CHECK(f.state_cov()(0, 0) == Approx(kVarianceFloor * dt));
}

TEST_CASE("only d depends on the seasonality") {
  ModelParams a = params(0.3, 2), b = a;
  b.factors[0].season = {Pattern::Spiked, 0.2, 0.3, 0.7};
  const std::vector<double> taus{0.3, 0.8}, s3{0.05};
  const SystemMatrices sa = build_system(a, 0.4, 0.01, taus, ObsMode::LogReturns, s3);
  const SystemMatrices sb = build_system(b, 0.4, 0.01, taus, ObsMode::LogReturns, s3);
  CHECK(sa.T == sb.T);
  CHECK(sa.R == sb.R);
  CHECK(sa.Q == sb.Q);
  CHECK(sa.Z == sb.Z);
  CHECK(sa.d != sb.d);
}

TEST_CASE("build_system input checks") {
  const ModelParams p = params(0.3, 2);
  const std::vector<double> s3{0.05};
  CHECK_THROWS_AS(build_system(p, 0.0, 0.0, std::vector<double>{0.3, 0.8}, ObsMode::LogReturns, s3), Error);
  CHECK_THROWS_AS(build_system(p, 0.0, 0.01, std::vector<double>{0.3}, ObsMode::LogReturns, s3), Error);
  CHECK_THROWS_AS(build_system(p, 0.0, 0.01, std::vector<double>{-0.1, 0.8}, ObsMode::LogReturns, s3), Error);
  ModelParams bad = p;
  bad.h[1] = 0.0;
  try {
    build_system(bad, 0.0, 0.01, std::vector<double>{0.3, 0.8}, ObsMode::LogReturns, s3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}
