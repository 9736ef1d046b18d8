/* gconsensus: guaranteed-cost consensus synthesis and simulation toolkit.
 *
 * C API over the C++ core. All objects are opaque handles created and
 * released by the library; every entry point returns a gcon_status and
 * reports details through gcon_last_error(). Strings returned through
 * char** out-parameters are heap-allocated; release them with
 * gcon_string_free().
 */
#ifndef GCONSENSUS_H
#define GCONSENSUS_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GCON_API __declspec(dllexport)
#else
#define GCON_API __attribute__((visibility("default")))
#endif

typedef enum gcon_status {
    GCON_OK = 0,
    GCON_ERR_PARSE = 1,            /* malformed JSON */
    GCON_ERR_VALIDATION = 2,       /* schema/dimension/cost-matrix failure */
    GCON_ERR_NOT_STABILIZABLE = 3, /* PBH test failed */
    GCON_ERR_NO_SOLUTION = 4,      /* Riccati iteration found no stabilizing P */
    GCON_ERR_INFEASIBLE = 5,       /* LMI phase-I certified infeasibility */
    GCON_ERR_NONFINITE = 6,        /* simulation blow-up guard tripped */
    GCON_ERR_PROPERTY = 7,         /* verify: at least one property failed */
    GCON_ERR_IO = 8,               /* file open/write failure */
    GCON_ERR_INVALID_ARGUMENT = 9, /* null handle or bad call */
    GCON_ERR_INTERNAL = 10
} gcon_status;

typedef struct gcon_config gcon_config;
typedef struct gcon_synthesis gcon_synthesis;
typedef struct gcon_mincost gcon_mincost;
typedef struct gcon_trajectory gcon_trajectory;

GCON_API const char* gcon_version(void);

/* Message for the most recent failure on this thread. */
GCON_API const char* gcon_last_error(void);

GCON_API void gcon_string_free(char* s);

/* ---- Configs ---------------------------------------------------------- */

GCON_API gcon_status gcon_config_load(const char* path, gcon_config** out);
GCON_API gcon_status gcon_config_parse(const char* json_text, gcon_config** out);
GCON_API void gcon_config_free(gcon_config* cfg);

/* Override the integration step / master seed after loading. */
GCON_API gcon_status gcon_config_set_dt(gcon_config* cfg, double dt);
GCON_API gcon_status gcon_config_set_seed(gcon_config* cfg, unsigned long long seed);

/* ---- Gain synthesis (Riccati route) ----------------------------------- */

GCON_API gcon_status gcon_synthesize(const gcon_config* cfg, gcon_synthesis** out);

/* Load a gain from a synthesis artifact or a bare {"K": [[...]]} file. */
GCON_API gcon_status gcon_gain_load(const char* path, gcon_synthesis** out);

GCON_API gcon_status gcon_synthesis_json(const gcon_synthesis* s, char** out_json);
GCON_API gcon_status gcon_synthesis_beta(const gcon_synthesis* s, double* out_beta);
GCON_API gcon_status gcon_synthesis_residual(const gcon_synthesis* s, double* out_res);
GCON_API void gcon_synthesis_free(gcon_synthesis* s);

/* ---- Simulation -------------------------------------------------------- */

GCON_API gcon_status gcon_simulate(const gcon_config* cfg, const gcon_synthesis* gain,
                                   gcon_trajectory** out);
GCON_API gcon_status gcon_trajectory_write_csv(const gcon_trajectory* t,
                                               const char* path);
GCON_API gcon_status gcon_trajectory_rows(const gcon_trajectory* t, long long* out);
GCON_API gcon_status gcon_trajectory_nonfinite(const gcon_trajectory* t, int* out);
GCON_API void gcon_trajectory_free(gcon_trajectory* t);

/* ---- Minimum guaranteed cost (LMI route) -------------------------------- */

GCON_API gcon_status gcon_mincost_solve(const gcon_config* cfg, gcon_mincost** out);
GCON_API gcon_status gcon_mincost_json(const gcon_mincost* m, char** out_json);
GCON_API gcon_status gcon_mincost_beta_star(const gcon_mincost* m, double* out);
GCON_API void gcon_mincost_free(gcon_mincost* m);

/* ---- Reports ------------------------------------------------------------ */

/* Run summary JSON; synth/mincost/traj handles are each optional (NULL). */
GCON_API gcon_status gcon_summary_json(const gcon_config* cfg,
                                       const gcon_synthesis* synth,
                                       const gcon_mincost* mincost,
                                       const gcon_trajectory* traj, char** out_json);

/* Runs the invariant suite. GCON_OK when every property passes,
 * GCON_ERR_PROPERTY when at least one fails (the report is still written). */
GCON_API gcon_status gcon_verify(const gcon_config* cfg, char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* GCONSENSUS_H */
