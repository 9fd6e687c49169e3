#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seasonvol::quad {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes/weights of order n, computed by Newton iteration on P_n and
/// cached per order (thread-safe).
const GaussLegendre& gauss_legendre(std::size_t order);

/// Composite Gauss–Legendre over [lo, hi]: the interval is first cut at every
/// breakpoint strictly inside it, then each smooth piece is split into
/// `panels` equal panels. `f` is only evaluated at interior nodes, so jump
/// discontinuities at breakpoints are integrated exactly.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 std::span<const double> breakpoints, std::size_t panels = 4,
                 std::size_t order = 24);

/// Sorted, de-duplicated list of the cut points of [lo, hi] (including both ends).
std::vector<double> cut_points(double lo, double hi, std::span<const double> breakpoints);

}  // namespace seasonvol::quad
