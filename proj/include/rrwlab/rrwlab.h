/* rrwlab - reflected-random-walk large-deviations laboratory.
 *
 * C interface of the shared library: opaque handles, integer status
 * codes, and a runner for the file-driven experiment commands. All
 * functions return RRW_OK (0) on success; on failure they return a
 * nonzero code and leave a message retrievable via rrw_last_error().
 */
#ifndef RRWLAB_H
#define RRWLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrw_status {
    RRW_OK = 0,
    RRW_EINVAL = 1,    /* bad argument or malformed input */
    RRW_EDOMAIN = 2,   /* evaluation outside the mathematical domain */
    RRW_ENOCONV = 3,   /* an iterative method failed to converge */
    RRW_ETAIL = 4,     /* not enough tail data for an estimate */
    RRW_EIO = 5,       /* file system problem */
    RRW_EVERIFY = 6,   /* acceptance criterion failed */
    RRW_EINTERNAL = 7
} rrw_status;

typedef struct rrw_model rrw_model;
typedef struct rrw_solution rrw_solution;

const char* rrw_last_error(void);
void rrw_string_free(char* s);
void rrw_version(int* major, int* minor);

/* ---- increment models ----
 * families: "two-point" (q), "gaussian" (mean sigma),
 * "exp-minus-constant" (rate shift), "lattice" (value prob pairs). */
int rrw_model_create(const char* family, const double* params, int nparams,
                     rrw_model** out);
void rrw_model_free(rrw_model* m);
int rrw_model_mean(const rrw_model* m, double* out);
int rrw_model_log_mgf(const rrw_model* m, double theta, double* out);
/* analytic != 0 uses the closed form when the family has one */
int rrw_model_conjugate(const rrw_model* m, double v, int analytic, double* out);
int rrw_model_conjugate_grad(const rrw_model* m, double v, double* out);
int rrw_model_tilt_root(const rrw_model* m, double* out);
/* writes a pass/fail report into buf; *all_pass set to 0/1 */
int rrw_model_validate(const rrw_model* m, char* buf, size_t buflen, int* all_pass);
int rrw_model_sample(const rrw_model* m, long count, uint64_t seed, uint64_t stream,
                     double* out);

/* ---- excursion decay constants ---- */
int rrw_solve_direct(const rrw_model* m, double p, double y, int grid, double level,
                     rrw_solution** out);
int rrw_solve_shooting(const rrw_model* m, double p, double y, double level,
                       rrw_solution** out);
void rrw_solution_free(rrw_solution* s);
double rrw_solution_value(const rrw_solution* s);
double rrw_solution_z(const rrw_solution* s);
double rrw_solution_ell(const rrw_solution* s);
double rrw_solution_horizon(const rrw_solution* s);
double rrw_solution_area_residual(const rrw_solution* s);
int rrw_solution_path_size(const rrw_solution* s);
/* arrays of length rrw_solution_path_size(); slope[last] repeats the end */
int rrw_solution_path(const rrw_solution* s, double* t, double* xi, double* slope);
int rrw_solve_bpi(const rrw_model* m, double p, int k, int grid, double* value,
                  double* argmin_y);

/* ---- simulation ---- */
int rrw_harvest_cycles(const rrw_model* m, long count, double p, uint64_t seed,
                       uint64_t stream, long* tau, double* W, double* peak);
int rrw_estimate_lambda(const long* tau, const double* W, long n, double* lambda,
                        double* se);

/* ---- experiment runner ----
 * cmd: conjugate | rate | simulate | tail-w1 | tail-vbar | findim |
 *      oracle | verify.
 * config_text: the experiment config ("" for defaults); extra_lines are
 * appended and override earlier keys (may be NULL). On success the
 * summary JSON is returned via *summary (free with rrw_string_free). */
int rrw_run(const char* cmd, const char* config_text, const char* extra_lines,
            char** summary);

#ifdef __cplusplus
}
#endif

#endif /* RRWLAB_H */
