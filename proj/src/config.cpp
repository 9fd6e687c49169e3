#include "seasonvol/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "seasonvol/errors.hpp"

namespace seasonvol {

namespace pt = boost::property_tree;

namespace {

double to_number(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (text.empty() || end == text.c_str() || *end != '\0' || !std::isfinite(v))
    fail(ErrorKind::Config, where + ": '" + text + "' is not a finite number");
  return v;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ModelConfig parse_model_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::Config, source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::set<std::string> factor_keys = {"lambda", "kappa", "sigma", "rho", "v0", "pi_F",
                                                    "pi_v",   "pattern", "a",   "b",   "t0"};
  ModelConfig cfg;
  std::map<int, FactorParams> factors;
  for (const auto& [section, body] : tree) {
    const std::string where = source + " [" + section + "]";
    if (section.rfind("factor.", 0) == 0) {
      const std::string idx = section.substr(7);
      char* end = nullptr;
      const long j = std::strtol(idx.c_str(), &end, 10);
      if (idx.empty() || *end != '\0' || j < 1) fail(ErrorKind::Config, where + ": factor sections are [factor.1], [factor.2], ...");
      for (const auto& [key, _] : body)
        if (!factor_keys.count(key)) fail(ErrorKind::Config, where + ": unknown key '" + key + "'");
      auto need = [&](const char* key) {
        const auto v = body.get_optional<std::string>(key);
        if (!v) fail(ErrorKind::Config, where + ": missing key '" + std::string(key) + "'");
        return to_number(*v, where + " " + key);
      };
      auto opt = [&](const char* key, double dflt) {
        const auto v = body.get_optional<std::string>(key);
        return v ? to_number(*v, where + " " + key) : dflt;
      };
      FactorParams f;
      f.lambda = opt("lambda", 0.0);
      f.kappa = need("kappa");
      f.sigma = need("sigma");
      f.rho = opt("rho", 0.0);
      f.v0 = need("v0");
      f.pi_F = opt("pi_F", 0.0);
      f.pi_v = opt("pi_v", 0.0);
      const auto pattern = body.get_optional<std::string>("pattern");
      try {
        f.season.pattern = pattern ? parse_pattern(*pattern) : Pattern::Constant;
      } catch (const Error& e) {
        fail(ErrorKind::Config, where + ": " + e.what());
      }
      f.season.a = need("a");
      if (f.season.pattern != Pattern::Constant) {
        f.season.b = need("b");
        f.season.t0 = opt("t0", 0.0);
      }
      try {
        validate(f);
      } catch (const Error& e) {
        fail(ErrorKind::Config, where + ": " + e.what());
      }
      factors[static_cast<int>(j)] = f;
    } else if (section == "measurement") {
      for (const auto& [key, value] : body) {
        if (key != "h") fail(ErrorKind::Config, where + ": unknown key '" + key + "'");
        std::stringstream ss(value.data());
        std::string item;
        while (std::getline(ss, item, ',')) cfg.params.h.push_back(to_number(item, where + " h"));
      }
    } else if (section == "options") {
      for (const auto& [key, value] : body) cfg.options[key] = value.data();
    } else {
      fail(ErrorKind::Config, where + ": unknown section");
    }
  }
  if (factors.empty()) fail(ErrorKind::Config, source + ": no [factor.N] section");
  int expect = 1;
  for (const auto& [j, f] : factors) {
    if (j != expect) fail(ErrorKind::Config, source + ": factor sections must be numbered 1..n without gaps");
    cfg.params.factors.push_back(f);
    ++expect;
  }
  validate(cfg.params);
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open parameter file '" + path + "'");
  return parse_model_config(in, path);
}

void write_model_config(std::ostream& os, const ModelConfig& cfg) {
  for (std::size_t j = 0; j < cfg.params.factors.size(); ++j) {
    const FactorParams& f = cfg.params.factors[j];
    if (j) os << '\n';
    os << "[factor." << (j + 1) << "]\n"
       << "lambda = " << g17(f.lambda) << '\n'
       << "kappa = " << g17(f.kappa) << '\n'
       << "sigma = " << g17(f.sigma) << '\n'
       << "rho = " << g17(f.rho) << '\n'
       << "v0 = " << g17(f.v0) << '\n'
       << "pi_F = " << g17(f.pi_F) << '\n'
       << "pi_v = " << g17(f.pi_v) << '\n'
       << "pattern = " << to_string(f.season.pattern) << '\n'
       << "a = " << g17(f.season.a) << '\n';
    if (f.season.pattern != Pattern::Constant)
      os << "b = " << g17(f.season.b) << '\n' << "t0 = " << g17(f.season.t0) << '\n';
  }
  if (!cfg.params.h.empty()) {
    os << "\n[measurement]\nh = ";
    for (std::size_t i = 0; i < cfg.params.h.size(); ++i) os << (i ? ", " : "") << g17(cfg.params.h[i]);
    os << '\n';
  }
  if (!cfg.options.empty()) {
    os << "\n[options]\n";
    for (const auto& [k, v] : cfg.options) os << k << " = " << v << '\n';
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace seasonvol
