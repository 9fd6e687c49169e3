/* C interface to the seasonal stochastic-volatility futures library.
 *
 * Every call returns an sv_status; on failure sv_last_error() describes the
 * problem (per thread, valid until the next failing call on that thread).
 * Strings returned through char** are allocated by the library and released
 * with sv_string_free(). Handles are released with their _free function.
 */
#ifndef SEASONVOL_H
#define SEASONVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(SV_BUILDING_LIBRARY)
#define SV_API __attribute__((visibility("default")))
#else
#define SV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sv_status {
  SV_OK = 0,
  SV_ERR_CONFIG = 1,           /* malformed input file or parameter set */
  SV_ERR_NUMERICAL = 2,        /* solver, quadrature or factorization failure */
  SV_ERR_NONCONVERGENCE = 3,   /* optimizer could not make progress */
  SV_ERR_INVALID_ARGUMENT = 4, /* argument outside the operation's domain */
  SV_ERR_IO = 5                /* file could not be read or written */
} sv_status;

typedef struct sv_model sv_model;
typedef struct sv_panel sv_panel;
typedef struct sv_report sv_report;

SV_API const char* sv_version(void);
SV_API const char* sv_last_error(void);
SV_API void sv_string_free(char* s);

/* ---- model parameters (INI text, see README) ---- */
SV_API sv_status sv_model_load(const char* path, sv_model** out);
SV_API sv_status sv_model_parse(const char* text, sv_model** out);
SV_API void sv_model_free(sv_model* m);
SV_API sv_status sv_model_to_text(const sv_model* m, char** out);
SV_API size_t sv_model_factor_count(const sv_model* m);
/* FNV-1a of the canonical text form. */
SV_API uint64_t sv_model_hash(const sv_model* m);
/* Value of an [options] key, or NULL. Owned by the model. */
SV_API const char* sv_model_option(const sv_model* m, const char* key);

/* ---- seasonality ---- */
/* pattern: sinusoidal, exp-sinusoidal, sawtooth, triangle, spiked, constant */
SV_API sv_status sv_theta(const char* pattern, double a, double b, double t0, double t, double* out);
/* ∫_0^T θ(t) e^{λt} dt */
SV_API sv_status sv_theta_transform(const char* pattern, double a, double b, double t0, double T,
                                    double lambda, double* out);

/* ---- characteristic function and pricing ---- */
SV_API sv_status sv_joint_cf(const sv_model* m, double u1_re, double u1_im, double u2_re, double u2_im,
                             double T, double T1, double T2, double* out_re, double* out_im);
/* European option on F(·, Tm) expiring at T; one price per strike. */
SV_API sv_status sv_price_european(const sv_model* m, double F0, double T, double Tm, double r, int is_call,
                                   const double* strikes, size_t n, double* prices);
/* Calendar spread (F(T,T1) - F(T,T2) - K)^+. *method (optional) receives
 * "lower-bound", "forward", "vanilla" or "monte-carlo" (static storage). */
SV_API sv_status sv_price_spread(const sv_model* m, double F1, double F2, double K, double T, double T1,
                                 double T2, double r, uint64_t mc_seed, double* price, const char** method);

/* ---- simulation ---- */
typedef struct sv_sim_options {
  double horizon;
  size_t steps;
  size_t paths;
  int physical; /* 0: risk-neutral, 1: physical measure */
  uint64_t seed;
  unsigned threads;
} sv_sim_options;

SV_API sv_sim_options sv_sim_options_default(void);
/* CSV `time,path_id,factor,v,contract,logF` for contracts maturing at
 * `maturities` (years), all starting at ln F = 0. */
SV_API sv_status sv_simulate_csv(const sv_model* m, const double* maturities, size_t n_maturities,
                                 const sv_sim_options* opt, char** csv);

/* ---- data ---- */
SV_API sv_status sv_panel_load(const char* path, sv_panel** out);
SV_API sv_status sv_panel_parse(const char* csv_text, sv_panel** out);
/* Panel generated from the model under the physical measure (business days,
 * quarterly contracts); `slots` must equal the model's h count. */
SV_API sv_status sv_panel_synthetic(const sv_model* m, const char* start, size_t dates, uint64_t seed,
                                    sv_panel** out);
SV_API void sv_panel_free(sv_panel* p);
SV_API size_t sv_panel_dates(const sv_panel* p);
SV_API size_t sv_panel_slots(const sv_panel* p);
SV_API sv_status sv_panel_to_csv(const sv_panel* p, char** csv);
/* table 1: dataset description, 2: per-slot vols, 3: per-month vols. */
SV_API sv_status sv_panel_summary_csv(const sv_panel* p, const char* name, int table, char** csv);

/* ---- filtering ---- */
SV_API sv_status sv_filter_loglik(const sv_model* m, const sv_panel* p, double* loglik);
/* CSV `date,factor,s1,s2,s3,theta` of filtered (smoothed != 0: smoothed) states. */
SV_API sv_status sv_export_states_csv(const sv_model* m, const sv_panel* p, int smoothed, char** csv);

/* ---- estimation ---- */
typedef struct sv_fit_options {
  uint64_t seed;
  size_t restarts;
  size_t max_stages;
  int polish;
  unsigned threads;
  const sv_model* initial; /* optional starting point */
} sv_fit_options;

SV_API sv_fit_options sv_fit_options_default(void);
SV_API sv_status sv_estimate(const sv_panel* p, const char* family, int freeze_lambda, const char* label,
                             const sv_fit_options* opt, sv_report** out);
SV_API sv_status sv_report_load(const char* path, sv_report** out);
SV_API sv_status sv_report_parse(const char* text, sv_report** out);
/* Report carrying only log-likelihood and information criteria. */
SV_API sv_status sv_report_from_loglik(const char* label, const char* family, int lambda_frozen, double loglik,
                                       size_t n_free, size_t n_dates, sv_report** out);
SV_API void sv_report_free(sv_report* r);
SV_API sv_status sv_report_to_text(const sv_report* r, char** out);
SV_API sv_status sv_report_to_csv(const sv_report* r, char** out);
SV_API double sv_report_loglik(const sv_report* r);
/* Fitted parameters as a model (INI-compatible). */
SV_API sv_status sv_report_model(const sv_report* r, sv_model** out);

SV_API sv_status sv_lr_tests(const sv_report* seasonal, const sv_report* nonseasonal, const sv_report* nolambda,
                             double* d1, double* p1, double* d2, double* p2);
/* Likelihood-ratio table over all seasonal reports in `reports`, pairing each
 * with the Constant free-λ report and the same family's frozen-λ report. */
SV_API sv_status sv_test_table_csv(const sv_report* const* reports, size_t n, char** csv);
SV_API sv_status sv_rank_csv(const sv_report* const* reports, size_t n, char** csv);

#ifdef __cplusplus
}
#endif

#endif
