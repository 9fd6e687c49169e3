#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "seasonvol/model.hpp"
#include "seasonvol/statespace.hpp"

namespace seasonvol {

using Date = std::chrono::sys_days;

/// ISO-8601 calendar date (YYYY-MM-DD). Throws Error(Config) otherwise.
Date parse_date(std::string_view text);
std::string format_date(Date d);
/// ACT/365 year fraction from `from` to `to`.
double year_fraction(Date from, Date to);

/// Daily futures prices by maturity slot (slot 0 = nearest contract).
struct FuturesPanel {
  static constexpr std::int32_t kNoMaturity = std::numeric_limits<std::int32_t>::min();

  std::vector<Date> dates;
  std::size_t slots = 0;
  Eigen::MatrixXd price;              // dates x slots, NaN = not quoted
  std::vector<std::int32_t> maturity; // dates x slots row-major, days since 1970-01-01

  std::size_t size() const { return dates.size(); }
  std::int32_t maturity_at(std::size_t t, std::size_t m) const { return maturity[t * slots + m]; }
  std::size_t observations() const;
};

/// Reads `date,slot,price,maturity` CSV. Slots are 1-based integers, optionally
/// prefixed with "c" (c1, c2, ...). Rows must be grouped by ascending date;
/// lines starting with # are skipped.
/// Violations throw Error(Config) naming the offending line.
FuturesPanel read_panel(std::istream& in, std::string_view source = "<input>");
FuturesPanel ingest(const std::string& csv_path);
void write_panel_csv(std::ostream& os, const FuturesPanel& panel);

/// Roll-adjusted log-returns. A slot's return on date t uses yesterday's price
/// of the contract it holds today, wherever that contract was quoted; a
/// contract with no previous quote (new listing) gets return 0 and is flagged
/// in `entering`. tau is the time to maturity on date t.
ObservationSeries to_returns(const FuturesPanel& panel);

/// Log-prices of the panel's slots with ln F(0, T_m) taken from the first
/// date. Only meaningful for a panel without rolls.
ObservationSeries to_log_prices(const FuturesPanel& panel);

/// Weights of the bracketing pair for linear interpolation in time to
/// maturity: target = w·taus[lo] + (1 - w)·taus[hi]. `taus` must be
/// increasing (NaN entries are skipped). Returns false if unbracketed.
bool interpolation_weights(std::span<const double> taus, double target, std::size_t& lo, std::size_t& hi,
                           double& w);

struct ConstantMaturitySeries {
  ObservationSeries series;  // tau holds the targets
  std::size_t masked = 0;    // (date, target) pairs without a bracketing pair
  Eigen::MatrixXd weight;    // weight on the shorter contract, NaN where masked
};

/// Constant-maturity returns: for each target τ, linear interpolation in time
/// to maturity between the same-contract returns of the two bracketing
/// contracts.
ConstantMaturitySeries to_constant_maturity(const FuturesPanel& panel, std::span<const double> targets);

struct PanelSummary {
  std::size_t dates = 0;
  std::string start, end;
  std::size_t slots = 0;
  double min_price = 0.0, max_price = 0.0, avg_price = 0.0;
  double avg_vol = 0.0;                 // mean of the per-slot vols
  std::vector<double> slot_vol;         // annualized (√252) vol of each slot's returns
  std::array<double, 12> month_vol{};   // annualized vol of slot 1 per calendar month (NaN if no data)
};

PanelSummary summarize(const FuturesPanel& panel);
/// Layouts: dataset description, per-slot vols, per-month vols of slot 1.
void write_summary_csv(std::ostream& os, const PanelSummary& s, std::string_view name = "panel");
void write_slot_vol_csv(std::ostream& os, const PanelSummary& s);
void write_month_vol_csv(std::ostream& os, const PanelSummary& s);

struct SyntheticPanelSpec {
  std::string start = "2010-01-04";
  std::size_t dates = 500;              // business days (Mon–Fri)
  std::size_t slots = 5;
  std::vector<int> contract_months{3, 6, 9, 12};
  int expiry_day = 15;                  // contracts expire on this day of their month
  double price_level = 100.0;           // flat initial curve F(0, T)
  std::uint64_t seed = 1;
};

/// Futures panel generated from the model under the physical measure: the
/// states (s1, s2, v) follow the Euler transition between business days and
/// ln F(t, T) = ln F(0, T) + e^{-λ(T-t)} s1 - ½ e^{-2λ(T-t)} s2 per factor.
/// Each slot's daily return also carries N(0, h_m²) measurement noise.
FuturesPanel synthetic_panel(const ModelParams& params, const SyntheticPanelSpec& spec);

}  // namespace seasonvol
