/* geoalign: rigid alignment of weighted point sets under the squared-distance
 * transport objective, with farthest-point compression for speed.
 *
 * Conventions:
 *   - Every fallible call returns ga_status; GA_OK is 0. On failure
 *     ga_last_error() holds a message (thread-local) until the next call.
 *   - Handles are opaque; free them with the matching *_free function.
 *     Functions returning const double* borrow storage owned by the handle;
 *     the pointer stays valid until the handle is freed.
 *   - Matrices are row-major. Coordinates are n*d doubles, point-major.
 */
#ifndef GEOALIGN_GEOALIGN_H
#define GEOALIGN_GEOALIGN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ga_status {
  GA_OK = 0,
  GA_ERROR_INVALID_ARGUMENT = 1,
  GA_ERROR_DIMENSION_MISMATCH = 2,
  GA_ERROR_PARSE = 3,
  GA_ERROR_INFEASIBLE = 4,
  GA_ERROR_NUMERIC = 5,
  GA_ERROR_IO = 6,
  GA_ERROR_INTERNAL = 7
} ga_status;

/* Library version, "major.minor.patch". */
const char* ga_version(void);

/* Message describing this thread's most recent failure ("" after success). */
const char* ga_last_error(void);

typedef struct ga_point_set ga_point_set;
typedef struct ga_transform ga_transform;
typedef struct ga_flow ga_flow;
typedef struct ga_report ga_report;

/* ---- Point sets ------------------------------------------------------- */

/* coords: n*d row-major; weights: n strictly positive finite values. */
ga_status ga_point_set_create(int64_t n, int64_t d, const double* coords,
                              const double* weights, ga_point_set** out);
ga_status ga_point_set_load(const char* path, ga_point_set** out);
ga_status ga_point_set_save(const ga_point_set* p, const char* path);
int64_t ga_point_set_size(const ga_point_set* p);
int64_t ga_point_set_dim(const ga_point_set* p);
const double* ga_point_set_coords(const ga_point_set* p);
const double* ga_point_set_weights(const ga_point_set* p);
double ga_point_set_total_weight(const ga_point_set* p);
double ga_point_set_diameter(const ga_point_set* p);
void ga_point_set_free(ga_point_set* p);

/* ---- Instance generation ---------------------------------------------- */

typedef struct ga_manifold_spec {
  int64_t latent_dim;   /* intrinsic dimension of the sampled surfaces */
  int64_t ambient_dim;  /* embedding dimension d */
  int64_t degree;       /* max total degree of the random polynomial maps */
  int64_t n1, n2;       /* sample counts for the two sets */
  double weight_low;    /* weights uniform in (weight_low, weight_high] */
  double weight_high;
  uint64_t seed;
} ga_manifold_spec;

/* Fills spec with the defaults (2 -> 10, degree 2, 100/100, (0,1], seed 0). */
void ga_manifold_spec_default(ga_manifold_spec* spec);

/* Two independently sampled polynomial surfaces, deterministic in spec.seed. */
ga_status ga_generate_manifold_pair(const ga_manifold_spec* spec,
                                    ga_point_set** out_a, ga_point_set** out_b);

/* n unit-weight samples of a randomly rotated rho-dimensional unit cube
 * embedded in dimension d. */
ga_status ga_generate_hypercube(int64_t rho, int64_t d, int64_t n,
                                uint64_t seed, ga_point_set** out);

/* Adds isotropic Gaussian noise with standard deviation eta * diameter(p). */
ga_status ga_add_noise(const ga_point_set* p, double eta, uint64_t seed,
                       ga_point_set** out);

/* Deterministically derives an independent seed from (seed, tag); seed 0 maps
 * to 0 so the "deterministic start" convention survives derivation. */
uint64_t ga_derive_seed(uint64_t seed, uint64_t tag);

/* ---- Rigid transforms ------------------------------------------------- */

/* rotation: d*d orthogonal (checked); translation: d. */
ga_status ga_transform_create(int64_t d, const double* rotation,
                              const double* translation, ga_transform** out);
ga_status ga_transform_identity(int64_t d, ga_transform** out);
int64_t ga_transform_dim(const ga_transform* t);
const double* ga_transform_rotation(const ga_transform* t);
const double* ga_transform_translation(const ga_transform* t);
int ga_transform_is_proper(const ga_transform* t); /* 1 iff det(R) > 0 */
/* out = "first, then second" as a single transform. */
ga_status ga_transform_then(const ga_transform* first,
                            const ga_transform* second, ga_transform** out);
ga_status ga_transform_inverse(const ga_transform* t, ga_transform** out);
ga_status ga_transform_apply(const ga_transform* t, const ga_point_set* p,
                             ga_point_set** out);
void ga_transform_free(ga_transform* t);

/* ---- Transport -------------------------------------------------------- */

/* Minimum-cost mass assignment between a and b under squared Euclidean
 * ground cost, normalized by min(total weights). out_value receives the
 * objective; out_flow (optional, may be NULL) receives the optimal plan. */
ga_status ga_solve_emd(const ga_point_set* a, const ga_point_set* b,
                       ga_flow** out_flow, double* out_value);
int64_t ga_flow_entry_count(const ga_flow* f);
ga_status ga_flow_entry(const ga_flow* f, int64_t index, int64_t* out_i,
                        int64_t* out_j, double* out_flow);
int64_t ga_flow_source_count(const ga_flow* f);
int64_t ga_flow_sink_count(const ga_flow* f);
double ga_flow_total(const ga_flow* f);
/* Objective value of plan f between a and b (validates feasibility). */
ga_status ga_flow_cost(const ga_flow* f, const ga_point_set* a,
                       const ga_point_set* b, double* out_value);
ga_status ga_flow_save(const ga_flow* f, const char* path);
void ga_flow_free(ga_flow* f);

/* ---- Compression ------------------------------------------------------ */

/* Farthest-point compression to at most k weighted representatives;
 * out_radius (optional) receives the covering radius. */
ga_status ga_compress(const ga_point_set* p, int64_t k, uint64_t seed,
                      ga_point_set** out, double* out_radius);

/* Center budget ceil((2/epsilon)^rho); epsilon must lie in (0,1). */
ga_status ga_k_from_epsilon(double epsilon, double rho, int64_t* out_k);

/* ---- Alignment pipeline ----------------------------------------------- */

typedef enum ga_init_mode {
  GA_INIT_IDENTITY = 0,
  GA_INIT_CENTROID = 1 /* start by matching weighted centroids */
} ga_init_mode;

typedef struct ga_align_params {
  int64_t k;        /* compression budget; if <= 0, epsilon/rho are used */
  double epsilon;   /* in (0,1) when used */
  double rho;       /* > 0 when epsilon is used */
  uint64_t seed;    /* drives the two compressions */
  double tolerance; /* stop when the objective improves by less than this */
  int64_t max_iterations;
  ga_init_mode init;
  int proper_rotations_only; /* nonzero restricts to det(R) = +1 */
} ga_align_params;

/* Fills params with the defaults (k 0, eps 0, tol 1e-3, 100 iters,
 * centroid init, reflections allowed). Callers must then set k or
 * epsilon+rho. Pass k >= max(n1, n2) for lossless (uncompressed) runs. */
void ga_align_params_default(ga_align_params* params);

/* Compress both sets, align the compressed sets by alternating transport
 * and orthogonal-fit steps, then score the resulting transform on the
 * original sets. */
ga_status ga_align(const ga_point_set* a, const ga_point_set* b,
                   const ga_align_params* params, ga_report** out);

typedef enum ga_report_field {
  GA_REPORT_K_A = 0,          /* achieved compressed sizes */
  GA_REPORT_K_B = 1,
  GA_REPORT_RADIUS_A = 2,     /* covering radii of the compressions */
  GA_REPORT_RADIUS_B = 3,
  GA_REPORT_DIAMETER_A = 4,
  GA_REPORT_DIAMETER_B = 5,
  GA_REPORT_EPS_EFF = 6,      /* max radius / max diameter */
  GA_REPORT_EMD_FULL = 7,     /* objective on the original sets */
  GA_REPORT_EMD_COMPRESSED = 8,
  GA_REPORT_ITERATIONS = 9,
  GA_REPORT_CONVERGED = 10,   /* 0 or 1 */
  GA_REPORT_INEQ6_LHS = 11,   /* certified bound: full vs compressed */
  GA_REPORT_INEQ6_RHS = 12,
  GA_REPORT_INEQ7_LHS = 13,   /* certified bound: compressed vs full */
  GA_REPORT_INEQ7_RHS = 14,
  GA_REPORT_TIME_COMPRESS_MS = 15,
  GA_REPORT_TIME_ALIGN_MS = 16,
  GA_REPORT_TIME_FINAL_EMD_MS = 17,
  GA_REPORT_TIME_TOTAL_MS = 18
} ga_report_field;

/* Scalar report fields; integer fields are widened to double. Returns NaN
 * for an unknown field. */
double ga_report_value(const ga_report* r, ga_report_field field);
int64_t ga_report_trace_length(const ga_report* r);
/* Objective value after each alignment iteration (borrowed). */
const double* ga_report_trace(const ga_report* r);
/* Copies of the aligned transform / the optimal full-size plan. */
ga_status ga_report_transform(const ga_report* r, ga_transform** out);
ga_status ga_report_flow(const ga_report* r, ga_flow** out);
void ga_report_free(ga_report* r);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GEOALIGN_GEOALIGN_H */
