#include "seasonvol/seasonvol.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seasonvol/charfn.hpp"
#include "seasonvol/cir_process.hpp"
#include "seasonvol/config.hpp"
#include "seasonvol/data.hpp"
#include "seasonvol/errors.hpp"
#include "seasonvol/estimation.hpp"
#include "seasonvol/kalman.hpp"
#include "seasonvol/pricing.hpp"
#include "seasonvol/seasonality.hpp"

struct sv_model {
  seasonvol::ModelConfig cfg;
};

struct sv_panel {
  seasonvol::FuturesPanel panel;
};

struct sv_report {
  seasonvol::FitReport report;
};

namespace {

using namespace seasonvol;

thread_local std::string g_last_error;

sv_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Constraint:
      return SV_ERR_CONFIG;
    case ErrorKind::Domain:
    case ErrorKind::Contract:
      return SV_ERR_INVALID_ARGUMENT;
    case ErrorKind::Numerical:
      return SV_ERR_NUMERICAL;
    case ErrorKind::NonConvergence:
      return SV_ERR_NONCONVERGENCE;
  }
  return SV_ERR_NUMERICAL;
}

struct IoError {
  std::string what;
};

template <class F>
sv_status guarded(F&& f) {
  try {
    f();
    return SV_OK;
  } catch (const Error& e) {
    g_last_error = std::string(to_string(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const IoError& e) {
    g_last_error = "io: " + e.what;
    return SV_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "numerical: out of memory";
    return SV_ERR_NUMERICAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("numerical: ") + e.what();
    return SV_ERR_NUMERICAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorKind::Contract, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError{std::string("cannot open '") + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string model_text(const ModelConfig& cfg) {
  std::ostringstream os;
  write_model_config(os, cfg);
  return os.str();
}

std::vector<FitReport> collect(const sv_report* const* reports, size_t n) {
  if (n) need(reports, "reports");
  std::vector<FitReport> out;
  for (size_t i = 0; i < n; ++i) {
    need(reports[i], "report");
    out.push_back(reports[i]->report);
  }
  return out;
}

}  // namespace

extern "C" {

const char* sv_version(void) { return "1.0.0"; }

const char* sv_last_error(void) { return g_last_error.c_str(); }

void sv_string_free(char* s) { std::free(s); }

sv_status sv_model_load(const char* path, sv_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string text = read_file(path);
    std::istringstream in(text);
    *out = new sv_model{parse_model_config(in, path)};
  });
}

sv_status sv_model_parse(const char* text, sv_model** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new sv_model{parse_model_config(in)};
  });
}

void sv_model_free(sv_model* m) { delete m; }

sv_status sv_model_to_text(const sv_model* m, char** out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    *out = dup(model_text(m->cfg));
  });
}

size_t sv_model_factor_count(const sv_model* m) { return m ? m->cfg.params.factors.size() : 0; }

uint64_t sv_model_hash(const sv_model* m) { return m ? fnv1a(model_text(m->cfg)) : 0; }

const char* sv_model_option(const sv_model* m, const char* key) {
  if (!m || !key) return nullptr;
  const auto it = m->cfg.options.find(key);
  return it == m->cfg.options.end() ? nullptr : it->second.c_str();
}

sv_status sv_theta(const char* pattern, double a, double b, double t0, double t, double* out) {
  return guarded([&] {
    need(pattern, "pattern");
    need(out, "out");
    const SeasonalitySpec spec{parse_pattern(pattern), a, b, t0};
    validate(spec);
    *out = eval_theta(spec, t);
  });
}

sv_status sv_theta_transform(const char* pattern, double a, double b, double t0, double T, double lambda,
                             double* out) {
  return guarded([&] {
    need(pattern, "pattern");
    need(out, "out");
    const SeasonalitySpec spec{parse_pattern(pattern), a, b, t0};
    validate(spec);
    *out = transform_theta(spec, T, lambda);
  });
}

sv_status sv_joint_cf(const sv_model* m, double u1_re, double u1_im, double u2_re, double u2_im, double T,
                      double T1, double T2, double* out_re, double* out_im) {
  return guarded([&] {
    need(m, "model");
    need(out_re, "out_re");
    need(out_im, "out_im");
    const cplx v = joint_cf(m->cfg.params.factors, {u1_re, u1_im}, {u2_re, u2_im}, T, T1, T2);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sv_status sv_price_european(const sv_model* m, double F0, double T, double Tm, double r, int is_call,
                            const double* strikes, size_t n, double* prices) {
  return guarded([&] {
    need(m, "model");
    if (n) {
      need(strikes, "strikes");
      need(prices, "prices");
    }
    const VanillaPricer pricer(m->cfg.params.factors, T, Tm, F0, r);
    for (size_t i = 0; i < n; ++i) prices[i] = pricer.price(strikes[i], is_call != 0);
  });
}

sv_status sv_price_spread(const sv_model* m, double F1, double F2, double K, double T, double T1, double T2,
                          double r, uint64_t mc_seed, double* price, const char** method) {
  return guarded([&] {
    need(m, "model");
    need(price, "price");
    PricingOptions opt;
    opt.mc_seed = mc_seed;
    const SpreadResult res =
        price_calendar_spread(SpreadSpec{K, T, T1, T2, r}, m->cfg.params.factors, F1, F2, opt);
    *price = res.price;
    if (method) {
      static const char* const names[] = {"lower-bound", "forward", "vanilla", "monte-carlo"};
      *method = names[0];
      for (const char* n : names)
        if (res.method == n) *method = n;
    }
  });
}

sv_sim_options sv_sim_options_default(void) {
  sv_sim_options o;
  o.horizon = 1.0;
  o.steps = 252;
  o.paths = 10;
  o.physical = 0;
  o.seed = 1;
  o.threads = 1;
  return o;
}

sv_status sv_simulate_csv(const sv_model* m, const double* maturities, size_t n_maturities,
                          const sv_sim_options* opt, char** csv) {
  return guarded([&] {
    need(m, "model");
    need(csv, "csv");
    if (n_maturities) need(maturities, "maturities");
    const sv_sim_options o = opt ? *opt : sv_sim_options_default();
    SimConfig cfg;
    cfg.horizon = o.horizon;
    cfg.steps = o.steps;
    cfg.n_paths = o.paths;
    cfg.measure = o.physical ? Measure::Physical : Measure::RiskNeutral;
    cfg.seed = o.seed;
    cfg.threads = o.threads ? o.threads : 1;
    const auto paths = simulate(m->cfg.params.factors, {maturities, n_maturities}, {}, cfg);
    std::ostringstream os;
    write_paths_csv(os, paths);
    *csv = dup(os.str());
  });
}

sv_status sv_panel_load(const char* path, sv_panel** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string text = read_file(path);
    std::istringstream in(text);
    *out = new sv_panel{read_panel(in, path)};
  });
}

sv_status sv_panel_parse(const char* csv_text, sv_panel** out) {
  return guarded([&] {
    need(csv_text, "csv_text");
    need(out, "out");
    std::istringstream in(csv_text);
    *out = new sv_panel{read_panel(in)};
  });
}

sv_status sv_panel_synthetic(const sv_model* m, const char* start, size_t dates, uint64_t seed, sv_panel** out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    SyntheticPanelSpec spec;
    if (start) spec.start = start;
    spec.dates = dates;
    spec.slots = m->cfg.params.h.size();
    spec.seed = seed;
    *out = new sv_panel{synthetic_panel(m->cfg.params, spec)};
  });
}

void sv_panel_free(sv_panel* p) { delete p; }

size_t sv_panel_dates(const sv_panel* p) { return p ? p->panel.size() : 0; }

size_t sv_panel_slots(const sv_panel* p) { return p ? p->panel.slots : 0; }

sv_status sv_panel_to_csv(const sv_panel* p, char** csv) {
  return guarded([&] {
    need(p, "panel");
    need(csv, "csv");
    std::ostringstream os;
    write_panel_csv(os, p->panel);
    *csv = dup(os.str());
  });
}

sv_status sv_panel_summary_csv(const sv_panel* p, const char* name, int table, char** csv) {
  return guarded([&] {
    need(p, "panel");
    need(csv, "csv");
    const PanelSummary s = summarize(p->panel);
    std::ostringstream os;
    switch (table) {
      case 1: write_summary_csv(os, s, name ? name : "panel"); break;
      case 2: write_slot_vol_csv(os, s); break;
      case 3: write_month_vol_csv(os, s); break;
      default: fail(ErrorKind::Domain, "summary table must be 1, 2 or 3");
    }
    *csv = dup(os.str());
  });
}

sv_status sv_filter_loglik(const sv_model* m, const sv_panel* p, double* out) {
  return guarded([&] {
    need(m, "model");
    need(p, "panel");
    need(out, "loglik");
    *out = loglik(to_returns(p->panel), m->cfg.params);
  });
}

sv_status sv_export_states_csv(const sv_model* m, const sv_panel* p, int smoothed, char** csv) {
  return guarded([&] {
    need(m, "model");
    need(p, "panel");
    need(csv, "csv");
    const ObservationSeries obs = to_returns(p->panel);
    const FilterOutput out = filter(obs, m->cfg.params);
    std::vector<Eigen::VectorXd> means = out.filtered_mean;
    if (smoothed) means = rts_smooth(out).mean;
    const auto& factors = m->cfg.params.factors;
    std::ostringstream os;
    os.precision(17);
    os << "date,factor,s1,s2,s3,theta\n";
    for (size_t t = 0; t < means.size(); ++t) {
      const std::string& date = obs.labels.size() > t + 1 ? obs.labels[t + 1] : std::to_string(t + 1);
      for (size_t j = 0; j < factors.size(); ++j) {
        const auto b = static_cast<Eigen::Index>(3 * j);
        os << date << ',' << (j + 1) << ',' << means[t](b) << ',' << means[t](b + 1) << ',' << means[t](b + 2)
           << ',' << eval_theta(factors[j].season, obs.times[t + 1]) << '\n';
      }
    }
    *csv = dup(os.str());
  });
}

sv_fit_options sv_fit_options_default(void) {
  sv_fit_options o;
  o.seed = 1;
  o.restarts = AnnealOptions{}.restarts;
  o.max_stages = AnnealOptions{}.max_stages;
  o.polish = 1;
  o.threads = 1;
  o.initial = nullptr;
  return o;
}

sv_status sv_estimate(const sv_panel* p, const char* family, int freeze_lambda, const char* label,
                      const sv_fit_options* opt, sv_report** out) {
  return guarded([&] {
    need(p, "panel");
    need(family, "family");
    need(out, "out");
    const sv_fit_options o = opt ? *opt : sv_fit_options_default();
    FitOptions fo;
    fo.seed = o.seed;
    fo.anneal.restarts = o.restarts;
    fo.anneal.max_stages = o.max_stages;
    fo.polish = o.polish != 0;
    fo.threads = o.threads ? o.threads : 1;
    if (o.initial) fo.initial = o.initial->cfg.params;
    FitReport r = fit(to_returns(p->panel), parse_pattern(family), freeze_lambda != 0, fo);
    if (label) r.label = label;
    *out = new sv_report{std::move(r)};
  });
}

sv_status sv_report_load(const char* path, sv_report** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string text = read_file(path);
    std::istringstream in(text);
    *out = new sv_report{parse_report(in, path)};
  });
}

sv_status sv_report_parse(const char* text, sv_report** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new sv_report{parse_report(in)};
  });
}

sv_status sv_report_from_loglik(const char* label, const char* family, int lambda_frozen, double ll,
                                size_t n_free, size_t n_dates, sv_report** out) {
  return guarded([&] {
    need(family, "family");
    need(out, "out");
    *out = new sv_report{
        report_from_loglik(label ? label : "", parse_pattern(family), lambda_frozen != 0, ll, n_free, n_dates)};
  });
}

void sv_report_free(sv_report* r) { delete r; }

sv_status sv_report_to_text(const sv_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    std::ostringstream os;
    write_report(os, r->report);
    *out = dup(os.str());
  });
}

sv_status sv_report_to_csv(const sv_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    std::ostringstream os;
    write_report_csv(os, r->report);
    *out = dup(os.str());
  });
}

double sv_report_loglik(const sv_report* r) { return r ? r->report.loglik : 0.0; }

sv_status sv_report_model(const sv_report* r, sv_model** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    require(!r->report.model.factors.empty(), ErrorKind::Contract, "report carries no fitted parameters");
    ModelConfig cfg;
    cfg.params = r->report.model;
    *out = new sv_model{std::move(cfg)};
  });
}

sv_status sv_lr_tests(const sv_report* seasonal, const sv_report* nonseasonal, const sv_report* nolambda,
                      double* d1, double* p1, double* d2, double* p2) {
  return guarded([&] {
    need(seasonal, "seasonal");
    need(nonseasonal, "nonseasonal");
    need(nolambda, "nolambda");
    const LrResult lr = lr_tests(seasonal->report, nonseasonal->report, nolambda->report);
    if (d1) *d1 = lr.d1;
    if (p1) *p1 = lr.p1;
    if (d2) *d2 = lr.d2;
    if (p2) *p2 = lr.p2;
  });
}

sv_status sv_test_table_csv(const sv_report* const* reports, size_t n, char** csv) {
  return guarded([&] {
    need(csv, "csv");
    const auto all = collect(reports, n);
    std::ostringstream os;
    write_lr_table_csv(os, all);
    *csv = dup(os.str());
  });
}

sv_status sv_rank_csv(const sv_report* const* reports, size_t n, char** csv) {
  return guarded([&] {
    need(csv, "csv");
    const auto all = collect(reports, n);
    const auto rows = rank_models(all);
    std::ostringstream os;
    write_ranking_csv(os, rows);
    *csv = dup(os.str());
  });
}

}  // extern "C"
