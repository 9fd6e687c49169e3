#include <catch_amalgamated.hpp>

#include <sstream>

#include "seasonvol/config.hpp"
#include "seasonvol/errors.hpp"

using namespace seasonvol;

namespace {

const char* kTwoFactor =
    "[factor.1]\n"
    "lambda = 0.3\nkappa = 1.5\nsigma = 0.3\nrho = -0.3\nv0 = 0.08\npi_F = 1.0\n"
    "pattern = sinusoidal\na = 0.06\nb = 0.04\nt0 = 0.45\n"
    "[factor.2]\n"
    "kappa = 4\nsigma = 0.2\nv0 = 0.02\na = 0.03\n"
    "[measurement]\n"
    "h = 0.001, 0.002,0.003\n"
    "[options]\n"
    "seed = 42\n";

ModelConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_model_config(in, "model.ini");
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Contract;
}

}  // namespace

TEST_CASE("parse a two-factor configuration") {
  const ModelConfig c = parse(kTwoFactor);
  REQUIRE(c.params.factors.size() == 2);
  const FactorParams& f = c.params.factors[0];
  CHECK(f.lambda == 0.3);
  CHECK(f.rho == -0.3);
  CHECK(f.season.pattern == Pattern::Sinusoidal);
  CHECK(f.season.t0 == 0.45);
  const FactorParams& g = c.params.factors[1];
  CHECK(g.lambda == 0.0);
  CHECK(g.pi_F == 0.0);
  CHECK(g.season.pattern == Pattern::Constant);
  CHECK(g.season.a == 0.03);
  CHECK(c.params.h == std::vector<double>{0.001, 0.002, 0.003});
  CHECK(c.options.at("seed") == "42");
}

TEST_CASE("configuration round-trips exactly") {
  const ModelConfig c = parse(kTwoFactor);
  std::ostringstream os;
  write_model_config(os, c);
  const ModelConfig d = parse(os.str());
  REQUIRE(d.params.factors.size() == 2);
  CHECK(d.params.factors[0].season.b == c.params.factors[0].season.b);
  CHECK(d.params.factors[1].kappa == c.params.factors[1].kappa);
  CHECK(d.params.h == c.params.h);
  CHECK(d.options == c.options);
  std::ostringstream again;
  write_model_config(again, d);
  CHECK(again.str() == os.str());
}

TEST_CASE("configuration errors") {
  const std::string m = "[measurement]\nh = 0.01\n";
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\nfoo = 3\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.2]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nsigma = .2\nv0 = .1\na = .1\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = x\nsigma = .2\nv0 = .1\na = .1\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\nrho = 1.5\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\npattern = sinusoidal\n" + m) ==
        ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\npattern = wavy\nb = .1\n" + m) ==
        ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\n[extra]\nx = 1\n" + m) == ErrorKind::Config);
  CHECK(kind_of("[factor.1]\nkappa = 1\nsigma = .2\nv0 = .1\na = .1\n[measurement]\nh = 0.01, -1\n") ==
        ErrorKind::Config);
  CHECK(kind_of("[factor.1\nkappa = 1\n") == ErrorKind::Config);
  CHECK(kind_of(m) == ErrorKind::Config);
  CHECK_THROWS_AS(load_model_config("/nonexistent/model.ini"), Error);
}

TEST_CASE("FNV-1a hash") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a("bar", fnv1a("foo")) == fnv1a("foobar"));
}
