#include "seasonvol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "seasonvol/errors.hpp"

namespace seasonvol::quad {

namespace {

GaussLegendre build_rule(std::size_t n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(std::size_t order) {
  require(order >= 1, ErrorKind::Domain, "gauss_legendre: order must be >= 1");
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendre>(build_rule(order));
  return *slot;
}

std::vector<double> cut_points(double lo, double hi, std::span<const double> breakpoints) {
  std::vector<double> pts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 std::span<const double> breakpoints, std::size_t panels, std::size_t order) {
  if (hi == lo) return 0.0;
  if (hi < lo) return -integrate(f, hi, lo, breakpoints, panels, order);
  const auto& rule = gauss_legendre(order);
  const auto pts = cut_points(lo, hi, breakpoints);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double width = (pts[s + 1] - pts[s]) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = pts[s] + width * static_cast<double>(p);
      const double half = 0.5 * width;
      const double mid = a + half;
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
      total += half * acc;
    }
  }
  return total;
}

}  // namespace seasonvol::quad
