#pragma once

#include <array>
#include <cstddef>

#include "seasonvol/seasonality.hpp"

// Published summary statistics of the one-factor fits on five commodity panels.
// Columns: sinusoidal, exp-sinusoidal, triangle, sawtooth, spiked, non-seasonal.
namespace published {

inline constexpr std::array<seasonvol::Pattern, 6> kColumns{
    seasonvol::Pattern::Sinusoidal, seasonvol::Pattern::ExpSinusoidal, seasonvol::Pattern::Triangle,
    seasonvol::Pattern::Sawtooth,   seasonvol::Pattern::Spiked,        seasonvol::Pattern::Constant};

struct Commodity {
  const char* name;
  std::size_t dates;
  std::size_t contracts;
  std::array<double, 6> ll, aic, bic;
  std::array<double, 5> d1, p1;
  std::array<double, 6> delta_aic;
  std::array<double, 6> ll_nolambda, d2;
};

inline const std::array<Commodity, 5> kTable{{
    {"corn", 2529, 10,
     {102465.71, 102484.74, 102472.79, 102480.13, 102484.19, 102453.7},
     {-204893.42, -204931.48, -204907.57, -204922.27, -204930.39, -204873.41},
     {-204782.53, -204820.6, -204796.69, -204811.39, -204819.5, -204774.2},
     {24.01, 62.07, 38.16, 52.86, 60.98},
     {0.0, 0.0, 0.0, 0.0, 0.0},
     {38.07, 0.0, 23.91, 9.21, 1.1, 58.07},
     {100161.49, 100175.27, 100158.01, 100144.85, 100173.33, 100113.78},
     {4608.43, 4618.94, 4629.55, 4670.56, 4621.73, 4679.84}},
    {"cotton", 2528, 10,
     {92282.69, 92283.76, 92280.73, 92272.13, 92296.98, 92261.8},
     {-184527.38, -184529.52, -184523.46, -184506.26, -184555.97, -184489.61},
     {-184416.5, -184418.65, -184412.58, -184395.39, -184445.09, -184390.4},
     {41.77, 43.92, 37.85, 20.66, 70.36},
     {0.0, 0.0, 0.0, 0.0, 0.0},
     {28.59, 26.45, 32.51, 49.71, 0.0, 66.36},
     {91488.25, 91497.24, 91486.01, 91484.56, 91512.44, 91426.22},
     {1588.87, 1573.04, 1589.43, 1575.14, 1569.08, 1671.16}},
    {"soybeans", 2529, 13,
     {141142.8, 141153.78, 141142.27, 141140.68, 141168.86, 141128.88},
     {-282241.6, -282263.57, -282240.54, -282237.36, -282293.73, -282217.75},
     {-282113.21, -282135.18, -282112.14, -282108.97, -282165.33, -282101.03},
     {27.84, 49.82, 26.78, 23.61, 79.97},
     {0.0, 0.0, 0.0, 0.0, 0.0},
     {52.13, 30.16, 53.19, 56.37, 0.0, 75.97},
     {139993.99, 140003, 140002.22, 139995.84, 140024.2, 139974.08},
     {2297.62, 2301.57, 2280.1, 2289.68, 2289.32, 2309.6}},
    {"sugar", 2528, 7,
     {64438.15, 64438.58, 64434.82, 64433.59, 64437.2, 64418.96},
     {-128844.31, -128845.15, -128837.64, -128835.17, -128842.39, -128809.91},
     {-128750.94, -128751.78, -128744.27, -128741.8, -128749.02, -128728.22},
     {38.39, 39.24, 31.73, 29.26, 36.48},
     {0.0, 0.0, 0.0, 0.0, 0.0},
     {0.85, 0.0, 7.51, 9.98, 2.76, 35.24},
     {63326.34, 63328.12, 63326.64, 63324.38, 63329.57, 63313.15},
     {2223.62, 2220.92, 2216.36, 2218.41, 2215.26, 2211.6}},
    {"wheat", 2529, 10,
     {101640.24, 101638.48, 101636.36, 101638.01, 101635.26, 101630.6},
     {-203242.47, -203238.96, -203234.71, -203238.03, -203232.51, -203227.2},
     {-203131.59, -203128.07, -203123.83, -203127.14, -203121.63, -203127.99},
     {19.27, 15.76, 11.51, 14.83, 9.32},
     {0.0001, 0.0004, 0.0032, 0.0006, 0.0095},
     {0.0, 3.52, 7.76, 4.45, 9.96, 15.27},
     {99162.99, 99162.51, 99159.02, 99152.05, 99155.02, 99146.93},
     {4954.5, 4951.93, 4954.68, 4971.92, 4960.47, 4967.34}},
}};

// Free parameters: λ, κ, σ, ρ, v0, a, π^F and one h per contract; the seasonal
// families add b and t0.
inline std::size_t n_free(const Commodity& c, seasonvol::Pattern p, bool lambda_frozen) {
  const std::size_t base = 7 + c.contracts;
  return base + (p == seasonvol::Pattern::Constant ? 0 : 2) - (lambda_frozen ? 1 : 0);
}

}  // namespace published
