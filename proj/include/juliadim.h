/* juliadim: pressure estimators for polynomial and rational maps.
 *
 * C interface over the core library. Every function returns a status code
 * (JD_OK on success); on failure jd_last_error() describes what went wrong
 * for the calling thread. Objects returned through out-parameters are owned
 * by the caller and released with the matching _free function.
 */

#ifndef JULIADIM_H
#define JULIADIM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define JD_OK 0
#define JD_ERR_INVALID_ARGUMENT 1
#define JD_ERR_POLE 2
#define JD_ERR_NON_CONVERGENCE 3
#define JD_ERR_BUDGET_EXCEEDED 4
#define JD_ERR_ALL_PRUNED 5   /* estimator sentinel: nothing survived */
#define JD_ERR_EMPTY_MATRIX 6 /* estimator sentinel: all rows filtered */
#define JD_ERR_NO_SIGN_CHANGE 7
#define JD_ERR_STRUCTURE 8
#define JD_ERR_AMBIGUITY 9
#define JD_ERR_IO 10
#define JD_ERR_UNKNOWN 99

#define JD_METRIC_EUCLIDEAN 0
#define JD_METRIC_SPHERICAL 1

typedef struct jd_map jd_map;
typedef struct jd_curve jd_curve;
typedef struct jd_puzzle jd_puzzle;
typedef struct jd_matrix jd_matrix;

const char* jd_version(void);
/* Message for the most recent failure on this thread. Never NULL. */
const char* jd_last_error(void);
const char* jd_status_name(int status);

/* ----------------------------------------------------------- maps ----- */

int jd_map_unicritical(int degree, double c_re, double c_im, jd_map** out);
/* coeffs: interleaved re,im pairs, ascending degree, count pairs. */
int jd_map_polynomial(const double* coeffs, int count, jd_map** out);
int jd_map_rational(const double* num, int num_count, const double* den,
                    int den_count, jd_map** out);
void jd_map_free(jd_map* map);

int jd_map_degree(const jd_map* map, int* out);
int jd_map_describe(const jd_map* map, char* buf, int cap, int* needed);
int jd_map_evaluate(const jd_map* map, double z_re, double z_im,
                    double* out_re, double* out_im);
int jd_map_derivative_modulus(const jd_map* map, double z_re, double z_im,
                              int metric, double* out);
/* Fibers hold at most `degree` entries: pts is interleaved re,im. */
int jd_map_preimages(const jd_map* map, double z_re, double z_im,
                     double* pts, int* mults, int cap, int* out_count);
int jd_map_critical_distance(const jd_map* map, double z_re, double z_im,
                             double* out);
int jd_map_derivative_disk_bounds(const jd_map* map, double center_re,
                                  double center_im, double radius,
                                  int metric, double* out_lo,
                                  double* out_hi);
int jd_map_green_potential(const jd_map* map, double z_re, double z_im,
                           double* out);
/* theta in turns; traces the external ray down to the given potential. */
int jd_map_ray_point(const jd_map* map, double theta, double potential,
                     double* out_re, double* out_im);
/* Base point at potential eta/2 on the ray of the rational angle "p/q". */
int jd_map_base_point(const jd_map* map, double eta, const char* angle,
                      double* out_re, double* out_im);

/* ------------------------------------------- tree and pullback ----- */

typedef struct {
  int depth;
  double delta;     /* ball radius (fuzzy / restricted / msample) */
  double big_delta; /* critical exclusion distance (restricted) */
  int samples;      /* m-gon vertex count (msample) */
  unsigned seed;
  unsigned long long node_budget;
  int threads;
  int metric;
} jd_tree_params;

void jd_tree_params_init(jd_tree_params* p);

/* estimator: tree-plain | tree-fuzzy | tree-restricted | tree-msample */
int jd_tree_pressure(const jd_map* map, const char* estimator,
                     double base_re, double base_im,
                     const jd_tree_params* params, const double* t_grid,
                     int t_count, jd_curve** out);

typedef struct {
  int depth;
  double radius; /* root ball radius */
  double kappa;  /* enclosure safety factor >= 1 */
  unsigned long long node_budget;
  int threads;
  int metric;
} jd_pullback_params;

void jd_pullback_params_init(jd_pullback_params* p);

int jd_pullback_pressure(const jd_map* map, double base_re, double base_im,
                         const jd_pullback_params* params,
                         const double* t_grid, int t_count, jd_curve** out);

/* Per-branch telescoping defects at t = 1 (all <= 0). values may be NULL
 * to fetch only the aggregates; otherwise cap must cover the branch
 * count (degree^depth). */
int jd_telescope(const jd_map* map, double base_re, double base_im,
                 const jd_pullback_params* params, double* values, int cap,
                 int* out_count, double* out_max_abs,
                 double* out_saturated_fraction);

/* ----------------------------------------------------- curves ----- */

int jd_curve_size(const jd_curve* curve, int* out);
int jd_curve_sample(const jd_curve* curve, int index, double* out_t,
                    double* out_value);
int jd_curve_branch_count(const jd_curve* curve, double* out);
int jd_curve_is_sentinel(const jd_curve* curve, int* out);
int jd_curve_warning_count(const jd_curve* curve, int* out);
/* Pointer stays valid until the curve is freed. */
int jd_curve_warning(const jd_curve* curve, int index, const char** out);
int jd_curve_estimator(const jd_curve* curve, const char** out);

/* Optional estimator re-evaluation callback for zero refinement: write the
 * pressure at t into *value and return JD_OK. */
typedef int (*jd_eval_fn)(double t, double* value, void* ctx);

int jd_curve_first_zero(const jd_curve* curve, jd_eval_fn eval, void* ctx,
                        double* out_t0, double* out_bracket,
                        int* out_monotone, int* out_lower_bound);
void jd_curve_free(jd_curve* curve);

/* Heuristic extrapolation of a zero sequence; *valid reports whether the
 * difference quotient was usable. */
int jd_aitken(const double* zeros, int count, double* out, int* out_valid);

/* ---------------------------------------------------- puzzles ----- */

typedef struct {
  double eta;
  int arc_samples;
  int potential_samples;
  double ray_eta_min;
  unsigned seed;
  int metric;
} jd_puzzle_params;

void jd_puzzle_params_init(jd_puzzle_params* p);

/* angles: comma-separated rational turns ("0,1/2"); NULL for the default
 * real-spine dissection. */
int jd_puzzle_create(const jd_map* map, const jd_puzzle_params* params,
                     const char* angles, jd_puzzle** out);
int jd_puzzle_refine_to(jd_puzzle* puzzle, int depth);
int jd_puzzle_depth(const jd_puzzle* puzzle, int* out);
int jd_puzzle_piece_count(const jd_puzzle* puzzle, int depth, int* out);
int jd_puzzle_piece(const jd_puzzle* puzzle, int depth, int index,
                    double* y_re, double* y_im, double* diam,
                    double* dist_to_crit);
int jd_puzzle_piece_word(const jd_puzzle* puzzle, int depth, int index,
                         int* letters, int cap, int* out_len);
int jd_puzzle_transition_count(const jd_puzzle* puzzle, int depth, int* out);
int jd_puzzle_transition(const jd_puzzle* puzzle, int depth, int index,
                         int* out_from, int* out_to, int* out_s);
int jd_puzzle_max_diam(const jd_puzzle* puzzle, int depth, double* out);
int jd_puzzle_misclassified(const jd_puzzle* puzzle, int depth,
                            unsigned long long* out);
int jd_puzzle_member(const jd_puzzle* puzzle, double z_re, double z_im,
                     int depth, int piece, int* out);

/* mode: plain | fuzzy | restricted | restricted-fuzzy | double-sample |
 * double-sample-in-piece | multiple. restriction < 0 selects the default
 * schedule A(N) = N; otherwise A is the given constant. */
int jd_puzzle_matrix(const jd_puzzle* puzzle, int depth, const char* mode,
                     double restriction, jd_matrix** out);

int jd_puzzle_save(const jd_puzzle* puzzle, const char* path, int binary);
int jd_puzzle_load(const char* path, jd_puzzle** out);
void jd_puzzle_free(jd_puzzle* puzzle);

/* --------------------------------------------------- matrices ----- */

int jd_matrix_dim(const jd_matrix* m, int* out);
int jd_matrix_entry(const jd_matrix* m, int i, int j, double* out);
int jd_matrix_nonzero_count(const jd_matrix* m, long long* out);
int jd_matrix_power(const jd_matrix* m, double t, jd_matrix** out);
int jd_matrix_spectral_radius(const jd_matrix* m, double tol, int max_iter,
                              int threads, double* out_radius,
                              int* out_converged, int* out_primitive,
                              int* out_period);
int jd_matrix_perron_root_in_t(const jd_matrix* m, double t_lo, double t_hi,
                               double tol_t, double* out_t, double* out_lambda,
                               int* out_monotone);
/* Pressure curve t -> log(spectral radius of the entrywise t-power). */
int jd_matrix_pressure_curve(const jd_matrix* m, const char* estimator,
                             const double* t_grid, int t_count,
                             jd_curve** out);
/* Triplet text dump; call with buf = NULL to size the buffer. */
int jd_matrix_triplets(const jd_matrix* m, char* buf, int cap, int* needed);
void jd_matrix_free(jd_matrix* m);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* JULIADIM_H */
