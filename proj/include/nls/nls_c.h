#ifndef NLS_C_H
#define NLS_C_H

/*
 * C API for the nonautonomous NLS integrability toolkit.
 *
 * All functions return an nls_status; on failure nls_last_error() describes
 * the problem (thread-local). Strings returned through char** are allocated
 * by the library and must be released with nls_string_free. Handles are
 * opaque and freed with their matching *_free function.
 *
 * Operations that run checks return NLS_OK only when every check passed;
 * NLS_CHECK_FAILED means the run completed but a residual or accuracy gate
 * failed (the report JSON is still produced).
 */

#ifndef NLS_API
#if defined(_WIN32)
#define NLS_API __declspec(dllexport)
#else
#define NLS_API __attribute__((visibility("default")))
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nls_status {
  NLS_OK = 0,
  NLS_CHECK_FAILED = 1,
  NLS_INVALID = 2,
  NLS_DOMAIN_ERROR = 3,
  NLS_IO_ERROR = 4
} nls_status;

typedef struct nls_expr nls_expr;
typedef struct nls_scenario nls_scenario;

NLS_API const char* nls_version(void);
NLS_API const char* nls_last_error(void);
NLS_API void nls_string_free(char* s);

/* ---- expressions ------------------------------------------------------ */

NLS_API nls_status nls_expr_parse(const char* source, nls_expr** out);
NLS_API void nls_expr_free(nls_expr* e);

/* params_json: flat {"name": number, ...} object or NULL. */
NLS_API nls_status nls_expr_eval(const nls_expr* e, double x, double t,
                                 const char* params_json, double* out);

/* var: "x" or "t"; order in [1,4]. */
NLS_API nls_status nls_expr_diff(const nls_expr* e, const char* var, int order,
                                 nls_expr** out);
NLS_API nls_status nls_expr_simplify(const nls_expr* e, nls_expr** out);
NLS_API nls_status nls_expr_to_string(const nls_expr* e, char** out);

/* ---- scenarios --------------------------------------------------------- */

NLS_API nls_status nls_scenario_from_file(const char* path, nls_scenario** out);
NLS_API nls_status nls_scenario_from_json(const char* json_text, nls_scenario** out);
NLS_API nls_status nls_scenario_from_catalog(const char* name, const char* params_json,
                                             nls_scenario** out);
NLS_API void nls_scenario_free(nls_scenario* s);
NLS_API nls_status nls_scenario_to_json(const nls_scenario* s, char** out);

/* JSON array of catalog scenario names. */
NLS_API nls_status nls_catalog_list(char** names_json);

/* ---- operations -------------------------------------------------------- */
/* Every operation returns the run report as JSON through report_json and
 * writes artifacts (report.json, field CSVs, ...) under out_dir when out_dir
 * is non-NULL. options_json may be NULL for defaults. */

/* options: {"tol": number} */
NLS_API nls_status nls_run_check(const nls_scenario* s, const char* options_json,
                                 const char* out_dir, char** report_json);

/* request: {"name"?, "g", "c1", "c2", "c3"?, "c4"?, "params"?,
 *           "grid": {x_min,x_max,n_x,t_min,t_max,n_t}, "tol"?} */
NLS_API nls_status nls_run_construct(const char* request_json, const char* out_dir,
                                     char** report_json);

/* q: {"q": "sn"} for the built-in profile or {"re": expr, "im": expr};
 * optional "tol". The scenario must carry a gauge block. */
NLS_API nls_status nls_run_map(const nls_scenario* s, const char* q_json,
                               const char* out_dir, char** report_json);

/* lax: either the auxiliary-function JSON ({"f1":{"re","im"},...,"lambda"})
 * or {"akns": lambda}; optional "tol". */
NLS_API nls_status nls_run_lax(const nls_scenario* s, const char* laxfns_json,
                               const char* out_dir, char** report_json);

/* options: {"dt": number, "T": number, "boundary": "zero"|"analytic",
 *           "psi0": {"re": expr, "im": expr}?, "max_error": number?}
 * psi0 defaults to the scenario's analytic solution at t_min. */
NLS_API nls_status nls_run_simulate(const nls_scenario* s, const char* options_json,
                                    const char* out_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* NLS_C_H */
