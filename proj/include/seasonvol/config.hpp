#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "seasonvol/model.hpp"

namespace seasonvol {

/// Parameter file: INI sections [factor.1], [factor.2], ... with keys lambda,
/// kappa, sigma, rho, v0, pi_F, pi_v, pattern, a, b, t0; [measurement] with
/// a comma-separated `h` list; free-form [options].
///
///   [factor.1]
///   lambda = 0.3
///   kappa = 1.5
///   ...
///   pattern = sinusoidal
///   a = 0.06
///   b = 0.04
///   t0 = 0.45
///
///   [measurement]
///   h = 0.002, 0.002, 0.002
struct ModelConfig {
  ModelParams params;
  std::map<std::string, std::string> options;
};

/// Throws Error(Config) on syntax errors, unknown sections or keys, missing
/// required keys and invalid parameter values.
ModelConfig parse_model_config(std::istream& in, const std::string& source = "<config>");
ModelConfig load_model_config(const std::string& path);
void write_model_config(std::ostream& os, const ModelConfig& cfg);

/// 64-bit FNV-1a, used to tag artifacts with the configuration they came from.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL);

}  // namespace seasonvol
