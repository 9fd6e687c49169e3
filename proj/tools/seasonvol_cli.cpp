// seasonvol: command-line front end over the C library.
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seasonvol/seasonvol.h"

namespace {

struct Failure {
  sv_status status;
  std::string message;
};

void check(sv_status s) {
  if (s != SV_OK) throw Failure{s, sv_last_error()};
}

void usage_error(const std::string& msg) { throw Failure{SV_ERR_INVALID_ARGUMENT, msg}; }

int exit_code(sv_status s) {
  switch (s) {
    case SV_OK: return 0;
    case SV_ERR_NUMERICAL: return 2;
    case SV_ERR_NONCONVERGENCE: return 3;
    default: return 1;
  }
}

const char* status_name(sv_status s) {
  switch (s) {
    case SV_OK: return "ok";
    case SV_ERR_CONFIG: return "config";
    case SV_ERR_NUMERICAL: return "numerical";
    case SV_ERR_NONCONVERGENCE: return "nonconvergence";
    case SV_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SV_ERR_IO: return "io";
  }
  return "unknown";
}

struct ModelDel {
  void operator()(sv_model* m) const { sv_model_free(m); }
};
struct PanelDel {
  void operator()(sv_panel* p) const { sv_panel_free(p); }
};
struct ReportDel {
  void operator()(sv_report* r) const { sv_report_free(r); }
};
using Model = std::unique_ptr<sv_model, ModelDel>;
using Panel = std::unique_ptr<sv_panel, PanelDel>;
using Report = std::unique_ptr<sv_report, ReportDel>;

std::string take(char* s) {
  std::string out = s ? s : "";
  sv_string_free(s);
  return out;
}

Model load_model(const std::string& path) {
  sv_model* m = nullptr;
  check(sv_model_load(path.c_str(), &m));
  return Model(m);
}

Panel load_panel(const std::string& path) {
  sv_panel* p = nullptr;
  check(sv_panel_load(path.c_str(), &p));
  return Panel(p);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string provenance(std::uint64_t seed, std::uint64_t hash) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# seed=%" PRIu64 " config_hash=%016" PRIx64 "\n", seed, hash);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{SV_ERR_IO, "io: cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{SV_ERR_IO, "io: cannot write '" + path + "'"};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal stochastic-volatility commodity futures model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sv_version()));

  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads")->envname("SEASONVOL_THREADS")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate variance and futures paths (CSV)");
  std::string sim_params, sim_out, sim_measure = "Q";
  std::vector<double> sim_mats;
  sv_sim_options so = sv_sim_options_default();
  sim->add_option("--params", sim_params, "Parameter file")->required()->check(CLI::ExistingFile);
  sim->add_option("--maturities", sim_mats, "Contract maturities in years")->required()->delimiter(',');
  sim->add_option("--horizon", so.horizon, "Horizon in years")->capture_default_str();
  sim->add_option("--steps", so.steps, "Time steps")->capture_default_str();
  sim->add_option("--paths", so.paths, "Number of paths")->capture_default_str();
  sim->add_option("--measure", sim_measure, "Q (risk-neutral) or P (physical)")
      ->check(CLI::IsMember({"Q", "P"}))
      ->capture_default_str();
  sim->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  sim->add_option("-o,--out", sim_out, "Output file (default stdout)");

  // price
  auto* price = app.add_subcommand("price", "Price European options or calendar spreads (CSV)");
  std::string pr_params, pr_product = "european", pr_out;
  std::vector<double> pr_strikes;
  double pr_F0 = 100, pr_F1 = 100, pr_F2 = 100, pr_T = 1, pr_Tm = -1, pr_T1 = -1, pr_T2 = -1, pr_r = 0;
  bool pr_put = false;
  std::uint64_t pr_seed = 1;
  price->add_option("--params", pr_params, "Parameter file")->required()->check(CLI::ExistingFile);
  price->add_option("--product", pr_product, "european or spread")
      ->check(CLI::IsMember({"european", "spread"}))
      ->capture_default_str();
  price->add_option("--strikes", pr_strikes, "Strikes")->required()->delimiter(',');
  price->add_option("--T", pr_T, "Option expiry in years")->capture_default_str();
  price->add_option("--Tm", pr_Tm, "Futures maturity (european; default T)");
  price->add_option("--F0", pr_F0, "Futures price (european)")->capture_default_str();
  price->add_option("--T1", pr_T1, "Near leg maturity (spread)");
  price->add_option("--T2", pr_T2, "Far leg maturity (spread)");
  price->add_option("--F1", pr_F1, "Near leg futures price (spread)")->capture_default_str();
  price->add_option("--F2", pr_F2, "Far leg futures price (spread)")->capture_default_str();
  price->add_option("--rate", pr_r, "Discount rate")->capture_default_str();
  price->add_flag("--put", pr_put, "Price puts instead of calls (european)");
  price->add_option("--seed", pr_seed, "Seed of the Monte Carlo fallback (spread)")->capture_default_str();
  price->add_option("-o,--out", pr_out, "Output file (default stdout)");

  // cf
  auto* cf = app.add_subcommand("cf", "Evaluate the joint characteristic function at real arguments (CSV)");
  std::string cf_params, cf_out;
  std::vector<double> cf_u1, cf_u2;
  double cf_T = 1, cf_T1 = -1, cf_T2 = -1;
  cf->add_option("--params", cf_params, "Parameter file")->required()->check(CLI::ExistingFile);
  cf->add_option("--u", cf_u1, "First argument values")->required()->delimiter(',');
  cf->add_option("--u2", cf_u2, "Second argument values (one value or one per --u; default 0)")->delimiter(',');
  cf->add_option("--T", cf_T, "Horizon")->capture_default_str();
  cf->add_option("--T1", cf_T1, "First maturity (default T)");
  cf->add_option("--T2", cf_T2, "Second maturity (default T1)");
  cf->add_option("-o,--out", cf_out, "Output file (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Quasi-maximum-likelihood fit of one model family");
  std::string es_data, es_family = "sinusoidal", es_label, es_init, es_out, es_csv;
  bool es_freeze = false, es_no_polish = false;
  sv_fit_options fo = sv_fit_options_default();
  est->add_option("--data", es_data, "Futures panel CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--family", es_family, "Seasonality pattern")
      ->check(CLI::IsMember({"sinusoidal", "exp-sinusoidal", "sawtooth", "triangle", "spiked", "constant"}))
      ->capture_default_str();
  est->add_flag("--freeze-lambda", es_freeze, "Fix lambda at zero");
  est->add_option("--label", es_label, "Model label in reports (default family name)");
  est->add_option("--seed", fo.seed, "Optimizer seed")->capture_default_str();
  est->add_option("--restarts", fo.restarts, "Annealing chains")->capture_default_str();
  est->add_option("--max-stages", fo.max_stages, "Temperature stages per chain")->capture_default_str();
  est->add_flag("--no-polish", es_no_polish, "Skip the Nelder-Mead polish");
  est->add_option("--init", es_init, "Parameter file used as the starting point")->check(CLI::ExistingFile);
  est->add_option("-o,--out", es_out, "Report file (default stdout)");
  est->add_option("--csv", es_csv, "Also write the parameter table as CSV");

  // test
  auto* test = app.add_subcommand("test", "Likelihood-ratio tests from estimation reports (CSV)");
  std::vector<std::string> te_reports;
  std::string te_out;
  test->add_option("reports", te_reports, "Report files")->required()->check(CLI::ExistingFile);
  test->add_option("-o,--out", te_out, "Output file (default stdout)");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank models by AIC with Akaike weights (CSV)");
  std::vector<std::string> rk_reports;
  std::string rk_out;
  rank->add_option("reports", rk_reports, "Report files")->required()->check(CLI::ExistingFile);
  rank->add_option("-o,--out", rk_out, "Output file (default stdout)");

  // summarize
  auto* sum = app.add_subcommand("summarize", "Descriptive statistics of a futures panel (CSV)");
  std::string su_data, su_name = "panel", su_out;
  int su_table = 0;
  sum->add_option("--data", su_data, "Futures panel CSV")->required()->check(CLI::ExistingFile);
  sum->add_option("--name", su_name, "Dataset name")->capture_default_str();
  sum->add_option("--table", su_table, "1: description, 2: slot vols, 3: month vols, 0: all")
      ->check(CLI::Range(0, 3))
      ->capture_default_str();
  sum->add_option("-o,--out", su_out, "Output file (default stdout)");

  // export-states
  auto* ex = app.add_subcommand("export-states", "Filtered or smoothed latent states (CSV)");
  std::string ex_params, ex_data, ex_out;
  bool ex_smooth = false;
  ex->add_option("--params", ex_params, "Parameter file")->required()->check(CLI::ExistingFile);
  ex->add_option("--data", ex_data, "Futures panel CSV")->required()->check(CLI::ExistingFile);
  ex->add_flag("--smoothed", ex_smooth, "Smoothed instead of filtered states");
  ex->add_option("-o,--out", ex_out, "Output file (default stdout)");

  // synth-panel
  auto* syn = app.add_subcommand("synth-panel", "Generate a futures panel from the model (CSV)");
  std::string sy_params, sy_start = "2010-01-04", sy_out;
  std::size_t sy_dates = 500;
  std::uint64_t sy_seed = 1;
  syn->add_option("--params", sy_params, "Parameter file (h list sets the slot count)")
      ->required()
      ->check(CLI::ExistingFile);
  syn->add_option("--dates", sy_dates, "Business days")->capture_default_str();
  syn->add_option("--start", sy_start, "First date")->capture_default_str();
  syn->add_option("--seed", sy_seed, "Random seed")->capture_default_str();
  syn->add_option("-o,--out", sy_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      Model m = load_model(sim_params);
      so.physical = sim_measure == "P";
      so.threads = threads;
      char* csv = nullptr;
      check(sv_simulate_csv(m.get(), sim_mats.data(), sim_mats.size(), &so, &csv));
      emit(provenance(so.seed, sv_model_hash(m.get())) + take(csv), sim_out);
    } else if (*price) {
      Model m = load_model(pr_params);
      std::string out;
      if (pr_product == "european") {
        if (pr_Tm < 0) pr_Tm = pr_T;
        std::vector<double> prices(pr_strikes.size());
        check(sv_price_european(m.get(), pr_F0, pr_T, pr_Tm, pr_r, pr_put ? 0 : 1, pr_strikes.data(),
                                pr_strikes.size(), prices.data()));
        out = pr_put ? "strike,put\n" : "strike,call\n";
        for (std::size_t i = 0; i < prices.size(); ++i) out += fmt(pr_strikes[i]) + "," + fmt(prices[i]) + "\n";
      } else {
        if (pr_T1 < 0 || pr_T2 < 0) usage_error("spread pricing needs --T1 and --T2");
        out = provenance(pr_seed, sv_model_hash(m.get())) + "strike,spread,method\n";
        for (double K : pr_strikes) {
          double v = 0.0;
          const char* method = nullptr;
          check(sv_price_spread(m.get(), pr_F1, pr_F2, K, pr_T, pr_T1, pr_T2, pr_r, pr_seed, &v, &method));
          out += fmt(K) + "," + fmt(v) + "," + method + "\n";
        }
      }
      emit(out, pr_out);
    } else if (*cf) {
      Model m = load_model(cf_params);
      if (cf_T1 < 0) cf_T1 = cf_T;
      if (cf_T2 < 0) cf_T2 = cf_T1;
      if (cf_u2.empty()) cf_u2.assign(1, 0.0);
      if (cf_u2.size() != 1 && cf_u2.size() != cf_u1.size()) usage_error("--u2 needs one value or one per --u");
      std::string out = "u1,u2,re,im\n";
      for (std::size_t i = 0; i < cf_u1.size(); ++i) {
        const double u2 = cf_u2.size() == 1 ? cf_u2[0] : cf_u2[i];
        double re = 0, im = 0;
        check(sv_joint_cf(m.get(), cf_u1[i], 0.0, u2, 0.0, cf_T, cf_T1, cf_T2, &re, &im));
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.17g,%.17g\n", cf_u1[i], u2, re, im);
        out += buf;
      }
      emit(out, cf_out);
    } else if (*est) {
      Panel p = load_panel(es_data);
      Model init;
      if (!es_init.empty()) init = load_model(es_init);
      fo.polish = es_no_polish ? 0 : 1;
      fo.threads = threads;
      fo.initial = init.get();
      std::uint64_t hash = fnv1a(read_text(es_data));
      const std::string settings = es_family + (es_freeze ? ":frozen" : ":free") + ":" +
                                   std::to_string(fo.restarts) + ":" + std::to_string(fo.max_stages) + ":" +
                                   std::to_string(fo.polish);
      hash = fnv1a(settings, hash);
      if (init) hash = fnv1a(std::to_string(sv_model_hash(init.get())), hash);
      if (es_label.empty()) es_label = es_family + (es_freeze ? "-nolambda" : "");
      sv_report* r = nullptr;
      check(sv_estimate(p.get(), es_family.c_str(), es_freeze ? 1 : 0, es_label.c_str(), &fo, &r));
      Report rep(r);
      char* text = nullptr;
      check(sv_report_to_text(rep.get(), &text));
      emit(provenance(fo.seed, hash) + take(text), es_out);
      if (!es_csv.empty()) {
        char* csv = nullptr;
        check(sv_report_to_csv(rep.get(), &csv));
        emit(take(csv), es_csv);
      }
    } else if (*test || *rank) {
      const auto& files = *test ? te_reports : rk_reports;
      std::vector<Report> owned;
      std::vector<const sv_report*> raw;
      for (const auto& f : files) {
        sv_report* r = nullptr;
        check(sv_report_load(f.c_str(), &r));
        owned.emplace_back(r);
        raw.push_back(r);
      }
      char* csv = nullptr;
      if (*test)
        check(sv_test_table_csv(raw.data(), raw.size(), &csv));
      else
        check(sv_rank_csv(raw.data(), raw.size(), &csv));
      emit(take(csv), *test ? te_out : rk_out);
    } else if (*sum) {
      Panel p = load_panel(su_data);
      std::string out;
      for (int t = 1; t <= 3; ++t) {
        if (su_table != 0 && su_table != t) continue;
        char* csv = nullptr;
        check(sv_panel_summary_csv(p.get(), su_name.c_str(), t, &csv));
        if (!out.empty()) out += "\n";
        out += take(csv);
      }
      emit(out, su_out);
    } else if (*ex) {
      Model m = load_model(ex_params);
      Panel p = load_panel(ex_data);
      char* csv = nullptr;
      check(sv_export_states_csv(m.get(), p.get(), ex_smooth ? 1 : 0, &csv));
      emit(take(csv), ex_out);
    } else if (*syn) {
      Model m = load_model(sy_params);
      sv_panel* raw = nullptr;
      check(sv_panel_synthetic(m.get(), sy_start.c_str(), sy_dates, sy_seed, &raw));
      Panel p(raw);
      char* csv = nullptr;
      check(sv_panel_to_csv(p.get(), &csv));
      emit(provenance(sy_seed, sv_model_hash(m.get())) + take(csv), sy_out);
    }
  } catch (const Failure& f) {
    std::cerr << "error: status=" << status_name(f.status) << " code=" << exit_code(f.status)
              << " message=\"" << f.message << "\"\n";
    return exit_code(f.status);
  }
  return 0;
}
