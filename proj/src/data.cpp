#include "seasonvol/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "seasonvol/cir_process.hpp"
#include "seasonvol/errors.hpp"

namespace seasonvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTradingDays = 252.0;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_line(std::string_view source, std::size_t line, const std::string& why) {
  std::ostringstream os;
  os << source << ":" << line << ": " << why;
  fail(ErrorKind::Config, os.str());
}

bool parse_double(std::string_view s, double& out) {
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return kNaN;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string tmp(text);
  if (text.size() != 10 || std::sscanf(tmp.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    fail(ErrorKind::Config, "invalid date '" + tmp + "' (expected YYYY-MM-DD)");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) fail(ErrorKind::Config, "invalid calendar date '" + tmp + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

double year_fraction(Date from, Date to) { return static_cast<double>((to - from).count()) / 365.0; }

std::size_t FuturesPanel::observations() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < price.size(); ++i)
    if (std::isfinite(price.data()[i])) ++n;
  return n;
}

FuturesPanel read_panel(std::istream& in, std::string_view source) {
  struct Row {
    std::size_t slot;
    double price;
    std::int32_t maturity;
  };
  std::vector<Date> dates;
  std::vector<std::vector<Row>> rows;
  std::vector<std::size_t> first_line;
  std::size_t max_slot = 0;

  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto f = split(line);
    if (!header) {
      if (f.size() != 4 || f[0] != "date" || f[1] != "slot" || f[2] != "price" || f[3] != "maturity")
        bad_line(source, lineno, "expected header 'date,slot,price,maturity'");
      header = true;
      continue;
    }
    if (f.size() != 4) bad_line(source, lineno, "expected 4 fields");
    Date date, mat;
    try {
      date = parse_date(f[0]);
      mat = parse_date(f[3]);
    } catch (const Error& e) {
      bad_line(source, lineno, e.what());
    }
    std::string_view slot_text = f[1];
    if (!slot_text.empty() && (slot_text.front() == 'c' || slot_text.front() == 'C')) slot_text.remove_prefix(1);
    double slot_value = 0.0;
    if (!parse_double(slot_text, slot_value) || slot_value < 1.0 || slot_value != std::floor(slot_value) ||
        slot_value > 1000.0)
      bad_line(source, lineno, "invalid slot '" + std::string(f[1]) + "'");
    double price = 0.0;
    if (!parse_double(f[2], price) || !std::isfinite(price)) bad_line(source, lineno, "invalid price");
    if (price <= 0.0) bad_line(source, lineno, "price must be > 0 (got " + std::string(f[2]) + ")");
    if (mat < date) bad_line(source, lineno, "maturity precedes the quote date");

    if (dates.empty() || date > dates.back()) {
      dates.push_back(date);
      rows.emplace_back();
      first_line.push_back(lineno);
    } else if (date < dates.back()) {
      bad_line(source, lineno, "dates out of order (" + format_date(date) + " after " + format_date(dates.back()) + ")");
    }
    const auto slot = static_cast<std::size_t>(slot_value) - 1;
    for (const Row& r : rows.back())
      if (r.slot == slot) bad_line(source, lineno, "duplicate (date, slot) entry");
    rows.back().push_back({slot, price, static_cast<std::int32_t>(mat.time_since_epoch().count())});
    max_slot = std::max(max_slot, slot + 1);
  }
  if (!header) fail(ErrorKind::Config, std::string(source) + ": empty file (missing header)");

  FuturesPanel p;
  p.dates = std::move(dates);
  p.slots = max_slot;
  p.price = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p.dates.size()), static_cast<Eigen::Index>(max_slot), kNaN);
  p.maturity.assign(p.dates.size() * max_slot, FuturesPanel::kNoMaturity);
  for (std::size_t t = 0; t < p.dates.size(); ++t) {
    for (const Row& r : rows[t]) {
      p.price(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(r.slot)) = r.price;
      p.maturity[t * max_slot + r.slot] = r.maturity;
    }
    std::int32_t last = FuturesPanel::kNoMaturity;
    for (std::size_t m = 0; m < max_slot; ++m) {
      const std::int32_t mat = p.maturity[t * max_slot + m];
      if (mat == FuturesPanel::kNoMaturity) continue;
      if (last != FuturesPanel::kNoMaturity && mat <= last)
        bad_line(source, first_line[t],
                 "maturities must increase across slots on " + format_date(p.dates[t]));
      last = mat;
    }
  }
  return p;
}

FuturesPanel ingest(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) fail(ErrorKind::Config, "cannot open data file '" + csv_path + "'");
  return read_panel(in, csv_path);
}

void write_panel_csv(std::ostream& os, const FuturesPanel& panel) {
  os << "date,slot,price,maturity\n";
  char buf[64];
  for (std::size_t t = 0; t < panel.size(); ++t) {
    const std::string d = format_date(panel.dates[t]);
    for (std::size_t m = 0; m < panel.slots; ++m) {
      const double price = panel.price(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      if (!std::isfinite(price)) continue;
      std::snprintf(buf, sizeof buf, "%.17g", price);
      os << d << ',' << (m + 1) << ',' << buf << ','
         << format_date(Date{std::chrono::days{panel.maturity_at(t, m)}}) << '\n';
    }
  }
}

namespace {

void fill_times(const FuturesPanel& panel, ObservationSeries& obs) {
  obs.times.resize(panel.size());
  obs.labels.resize(panel.size());
  for (std::size_t t = 0; t < panel.size(); ++t) {
    obs.times[t] = year_fraction(panel.dates.front(), panel.dates[t]);
    obs.labels[t] = format_date(panel.dates[t]);
  }
}

double tau_of(const FuturesPanel& p, std::size_t t, std::size_t m) {
  const std::int32_t mat = p.maturity_at(t, m);
  if (mat == FuturesPanel::kNoMaturity) return kNaN;
  return static_cast<double>(mat - p.dates[t].time_since_epoch().count()) / 365.0;
}

// Yesterday's price of the contract with maturity `mat`, NaN if not quoted,
// and whether the contract was listed at all.
double previous_price(const FuturesPanel& p, std::size_t t, std::int32_t mat, bool& listed) {
  listed = false;
  for (std::size_t m = 0; m < p.slots; ++m)
    if (p.maturity_at(t - 1, m) == mat) {
      listed = true;
      return p.price(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(m));
    }
  return kNaN;
}

}  // namespace

ObservationSeries to_returns(const FuturesPanel& panel) {
  require(panel.size() >= 2, ErrorKind::Domain, "to_returns: panel needs at least two dates");
  ObservationSeries obs;
  obs.mode = ObsMode::LogReturns;
  fill_times(panel, obs);
  const auto steps = static_cast<Eigen::Index>(panel.size() - 1);
  const auto k = static_cast<Eigen::Index>(panel.slots);
  obs.y = Eigen::MatrixXd::Constant(steps, k, kNaN);
  obs.tau = Eigen::MatrixXd::Constant(steps, k, kNaN);
  obs.entering.assign(panel.size() - 1 > 0 ? (panel.size() - 1) * panel.slots : 0, 0);
  for (std::size_t t = 1; t < panel.size(); ++t) {
    for (std::size_t m = 0; m < panel.slots; ++m) {
      const double price = panel.price(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      const std::int32_t mat = panel.maturity_at(t, m);
      if (!std::isfinite(price) || mat == FuturesPanel::kNoMaturity) continue;
      const auto r = static_cast<Eigen::Index>(t - 1);
      obs.tau(r, static_cast<Eigen::Index>(m)) = tau_of(panel, t, m);
      bool listed = false;
      const double prev = previous_price(panel, t, mat, listed);
      if (!listed) {
        obs.y(r, static_cast<Eigen::Index>(m)) = 0.0;
        obs.entering[(t - 1) * panel.slots + m] = 1;
      } else if (std::isfinite(prev)) {
        obs.y(r, static_cast<Eigen::Index>(m)) = std::log(price / prev);
      }
    }
  }
  return obs;
}

ObservationSeries to_log_prices(const FuturesPanel& panel) {
  require(panel.size() >= 2, ErrorKind::Domain, "to_log_prices: panel needs at least two dates");
  ObservationSeries obs;
  obs.mode = ObsMode::LogPrices;
  fill_times(panel, obs);
  const auto steps = static_cast<Eigen::Index>(panel.size() - 1);
  const auto k = static_cast<Eigen::Index>(panel.slots);
  obs.y = Eigen::MatrixXd::Constant(steps, k, kNaN);
  obs.tau = Eigen::MatrixXd::Constant(steps, k, kNaN);
  obs.entering.assign((panel.size() - 1) * panel.slots, 0);
  obs.log_f0.resize(panel.slots);
  for (std::size_t m = 0; m < panel.slots; ++m) {
    const double p0 = panel.price(0, static_cast<Eigen::Index>(m));
    require(std::isfinite(p0), ErrorKind::Domain, "to_log_prices: every slot needs a price on the first date");
    obs.log_f0[m] = std::log(p0);
  }
  for (std::size_t t = 1; t < panel.size(); ++t)
    for (std::size_t m = 0; m < panel.slots; ++m) {
      const double price = panel.price(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      if (!std::isfinite(price)) continue;
      obs.y(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(m)) = std::log(price);
      obs.tau(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(m)) = tau_of(panel, t, m);
    }
  return obs;
}

bool interpolation_weights(std::span<const double> taus, double target, std::size_t& lo, std::size_t& hi,
                           double& w) {
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  lo = hi = none;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (std::isnan(taus[i])) continue;
    if (taus[i] <= target) lo = i;
    if (taus[i] >= target && hi == none) hi = i;
  }
  if (lo == none || hi == none) return false;
  if (taus[lo] == target) {
    hi = lo;
    w = 1.0;
    return true;
  }
  if (taus[hi] == target) {
    lo = hi;
    w = 1.0;
    return true;
  }
  w = (taus[hi] - target) / (taus[hi] - taus[lo]);
  return true;
}

ConstantMaturitySeries to_constant_maturity(const FuturesPanel& panel, std::span<const double> targets) {
  require(!targets.empty(), ErrorKind::Domain, "to_constant_maturity: no target maturities");
  for (double tau : targets)
    require(tau >= 0.0 && std::isfinite(tau), ErrorKind::Domain, "to_constant_maturity: targets must be >= 0");
  const ObservationSeries ret = to_returns(panel);
  ConstantMaturitySeries out;
  ObservationSeries& obs = out.series;
  obs.mode = ObsMode::LogReturns;
  obs.times = ret.times;
  obs.labels = ret.labels;
  const auto steps = static_cast<Eigen::Index>(ret.steps());
  const auto nt = static_cast<Eigen::Index>(targets.size());
  obs.y = Eigen::MatrixXd::Constant(steps, nt, kNaN);
  obs.tau = Eigen::MatrixXd::Constant(steps, nt, kNaN);
  obs.entering.assign(ret.steps() * targets.size(), 0);
  out.weight = Eigen::MatrixXd::Constant(steps, nt, kNaN);

  std::vector<double> taus, rets;
  for (Eigen::Index t = 0; t < steps; ++t) {
    taus.clear();
    rets.clear();
    for (std::size_t m = 0; m < ret.slots(); ++m) {
      const double r = ret.y(t, static_cast<Eigen::Index>(m));
      const bool usable = std::isfinite(r) && !ret.entering[static_cast<std::size_t>(t) * ret.slots() + m];
      taus.push_back(usable ? ret.tau(t, static_cast<Eigen::Index>(m)) : kNaN);
      rets.push_back(r);
    }
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double target = targets[static_cast<std::size_t>(j)];
      std::size_t lo = 0, hi = 0;
      double w = 0.0;
      if (!interpolation_weights(taus, target, lo, hi, w)) {
        ++out.masked;
        continue;
      }
      obs.y(t, j) = w * rets[lo] + (1.0 - w) * rets[hi];
      obs.tau(t, j) = target;
      out.weight(t, j) = w;
    }
  }
  return out;
}

PanelSummary summarize(const FuturesPanel& panel) {
  PanelSummary s;
  s.dates = panel.size();
  s.slots = panel.slots;
  if (panel.size() == 0) return s;
  s.start = format_date(panel.dates.front());
  s.end = format_date(panel.dates.back());
  double sum = 0.0;
  std::size_t n = 0;
  s.min_price = std::numeric_limits<double>::infinity();
  s.max_price = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < panel.price.size(); ++i) {
    const double p = panel.price.data()[i];
    if (!std::isfinite(p)) continue;
    s.min_price = std::min(s.min_price, p);
    s.max_price = std::max(s.max_price, p);
    sum += p;
    ++n;
  }
  s.avg_price = n ? sum / static_cast<double>(n) : kNaN;
  s.slot_vol.assign(panel.slots, kNaN);
  s.month_vol.fill(kNaN);
  if (panel.size() < 2) return s;

  const ObservationSeries ret = to_returns(panel);
  std::array<std::vector<double>, 12> by_month;
  double vol_sum = 0.0;
  std::size_t vol_n = 0;
  for (std::size_t m = 0; m < panel.slots; ++m) {
    std::vector<double> xs;
    for (std::size_t t = 0; t < ret.steps(); ++t) {
      const double r = ret.y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      if (!std::isfinite(r) || ret.entering[t * panel.slots + m]) continue;
      xs.push_back(r);
      if (m == 0) {
        const std::chrono::year_month_day ymd{panel.dates[t + 1]};
        by_month[static_cast<unsigned>(ymd.month()) - 1].push_back(r);
      }
    }
    s.slot_vol[m] = sample_sd(xs) * std::sqrt(kTradingDays);
    if (std::isfinite(s.slot_vol[m])) {
      vol_sum += s.slot_vol[m];
      ++vol_n;
    }
  }
  s.avg_vol = vol_n ? vol_sum / static_cast<double>(vol_n) : kNaN;
  for (std::size_t mo = 0; mo < 12; ++mo) s.month_vol[mo] = sample_sd(by_month[mo]) * std::sqrt(kTradingDays);
  return s;
}

namespace {

std::string num(double x, int decimals) {
  if (!std::isfinite(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

}  // namespace

void write_summary_csv(std::ostream& os, const PanelSummary& s, std::string_view name) {
  os << "name,dates,start_date,end_date,futures,min_price,max_price,avg_price,avg_vol\n";
  os << name << ',' << s.dates << ',' << s.start << ',' << s.end << ',' << s.slots << ',' << num(s.min_price, 2)
     << ',' << num(s.max_price, 2) << ',' << num(s.avg_price, 2) << ',' << num(100.0 * s.avg_vol, 2) << "%\n";
}

void write_slot_vol_csv(std::ostream& os, const PanelSummary& s) {
  os << "contract,vol\n";
  for (std::size_t m = 0; m < s.slot_vol.size(); ++m)
    os << 'c' << (m + 1) << ',' << num(100.0 * s.slot_vol[m], 2) << "%\n";
}

void write_month_vol_csv(std::ostream& os, const PanelSummary& s) {
  static constexpr const char* names[] = {"January", "February", "March",     "April",   "May",      "June",
                                          "July",    "August",   "September", "October", "November", "December"};
  os << "month,vol\n";
  for (std::size_t i = 0; i < 12; ++i) os << names[i] << ',' << num(100.0 * s.month_vol[i], 2) << "%\n";
}

FuturesPanel synthetic_panel(const ModelParams& params, const SyntheticPanelSpec& spec) {
  validate(params);
  require(spec.dates >= 2, ErrorKind::Domain, "synthetic_panel: at least two dates required");
  require(spec.slots >= 1, ErrorKind::Domain, "synthetic_panel: at least one slot required");
  require(params.h.size() == spec.slots, ErrorKind::Config,
          "synthetic_panel: number of measurement errors h does not match the slot count");
  require(!spec.contract_months.empty(), ErrorKind::Domain, "synthetic_panel: empty contract calendar");
  require(spec.price_level > 0.0, ErrorKind::Domain, "synthetic_panel: price level must be > 0");
  for (int mo : spec.contract_months)
    require(mo >= 1 && mo <= 12, ErrorKind::Domain, "synthetic_panel: contract months must be in 1..12");
  require(spec.expiry_day >= 1 && spec.expiry_day <= 28, ErrorKind::Domain, "synthetic_panel: expiry day must be in 1..28");

  FuturesPanel p;
  p.slots = spec.slots;
  Date d = parse_date(spec.start);
  while (p.dates.size() < spec.dates) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) p.dates.push_back(d);
    d += std::chrono::days{1};
  }

  std::vector<int> months = spec.contract_months;
  std::sort(months.begin(), months.end());
  months.erase(std::unique(months.begin(), months.end()), months.end());
  std::vector<std::int32_t> expiries;
  const int y0 = static_cast<int>(std::chrono::year_month_day{p.dates.front()}.year());
  const int y1 = static_cast<int>(std::chrono::year_month_day{p.dates.back()}.year()) +
                 static_cast<int>(spec.slots / months.size()) + 2;
  for (int y = y0; y <= y1; ++y)
    for (int mo : months) {
      const Date e{std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(mo)} /
                   std::chrono::day{static_cast<unsigned>(spec.expiry_day)}};
      expiries.push_back(static_cast<std::int32_t>(e.time_since_epoch().count()));
    }

  const std::size_t n = params.factors.size();
  std::vector<std::mt19937_64> eng;
  for (std::size_t j = 0; j < n; ++j) eng.emplace_back(stream_seed(spec.seed, 0, j));
  std::mt19937_64 noise_eng(stream_seed(spec.seed, 0, n));
  std::normal_distribution<double> normal;

  std::vector<double> s1(n, 0.0), s2(n, 0.0), v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = params.factors[j].v0;
  std::map<std::int32_t, double> noise;
  const double lf0 = std::log(spec.price_level);

  p.price = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p.dates.size()), static_cast<Eigen::Index>(spec.slots), kNaN);
  p.maturity.assign(p.dates.size() * spec.slots, FuturesPanel::kNoMaturity);
  for (std::size_t t = 0; t < p.dates.size(); ++t) {
    if (t > 0) {
      const double t_prev = year_fraction(p.dates.front(), p.dates[t - 1]);
      const double dt = year_fraction(p.dates[t - 1], p.dates[t]);
      const double sdt = std::sqrt(dt);
      for (std::size_t j = 0; j < n; ++j) {
        const FactorParams& f = params.factors[j];
        const double z1 = normal(eng[j]);
        const double z2 = f.rho * z1 + std::sqrt(1.0 - f.rho * f.rho) * normal(eng[j]);
        const double vp = std::max(v[j], 0.0);
        s1[j] += (-f.lambda * s1[j] + f.pi_F * vp) * dt + std::sqrt(vp) * sdt * z1;
        s2[j] += (vp - 2.0 * f.lambda * s2[j]) * dt;
        v[j] += (f.kappa * detail::theta_unchecked(f.season, t_prev) - (f.kappa - f.sigma * f.pi_v) * vp) * dt +
                f.sigma * std::sqrt(vp) * sdt * z2;
      }
    }
    const std::int32_t today = static_cast<std::int32_t>(p.dates[t].time_since_epoch().count());
    auto first = std::upper_bound(expiries.begin(), expiries.end(), today);
    require(expiries.end() - first >= static_cast<std::ptrdiff_t>(spec.slots), ErrorKind::Domain,
            "synthetic_panel: contract calendar exhausted");
    std::map<std::int32_t, double> next_noise;
    for (std::size_t m = 0; m < spec.slots; ++m) {
      const std::int32_t mat = *(first + static_cast<std::ptrdiff_t>(m));
      const double tau = static_cast<double>(mat - today) / 365.0;
      double lf = lf0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(-params.factors[j].lambda * tau);
        lf += e * s1[j] - 0.5 * e * e * s2[j];
      }
      double eps = 0.0;
      if (auto it = noise.find(mat); it != noise.end()) eps = it->second + params.h[m] * normal(noise_eng);
      next_noise[mat] = eps;
      p.price(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m)) = std::exp(lf + eps);
      p.maturity[t * spec.slots + m] = mat;
    }
    noise.swap(next_noise);
  }
  return p;
}

}  // namespace seasonvol
