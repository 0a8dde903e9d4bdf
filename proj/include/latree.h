/* C interface to the binary latent tree library.
 *
 * All functions return lt_status; on failure lt_last_error() carries a
 * message for the calling thread. Strings returned through out-parameters
 * are heap-allocated and must be released with lt_string_free().
 */
#ifndef LATREE_H
#define LATREE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct lt_tree lt_tree; /* opaque leaf-labeled tree */

typedef enum {
    LT_OK = 0,
    LT_ERR_INPUT = 2,     /* malformed input or precondition violation */
    LT_ERR_OFF_MODEL = 3, /* data inconsistent with every model point */
    LT_ERR_INTERNAL = 4   /* broken internal invariant */
} lt_status;

const char* lt_last_error(void);
void lt_string_free(char* s);

/* -- trees ---------------------------------------------------------------- */

lt_status lt_tree_parse(const char* newick, lt_tree** out);
void lt_tree_free(lt_tree* t);
lt_status lt_tree_newick(const lt_tree* t, char** out); /* canonical form */
int lt_tree_leaf_count(const lt_tree* t);
int lt_tree_node_count(const lt_tree* t);

/* -- pipelines ------------------------------------------------------------ */

/* Forward pipeline for a parameter file (chart theta, omega or rho).
 * bundle_json holds {"p":…, "lambda":…, "mu":…, "kappa":…, "rho":…|null,
 * "csv":"…"}; csv_precision sets the decimals of the csv mirror. */
lt_status lt_forward(const lt_tree* t, const char* params_json, int csv_precision,
                     char** bundle_json);

/* Fiber analysis of a coordinate file (kind p, lambda, mu or kappa).
 * with_points == 0: classification only. Otherwise parameters are recovered
 * and, when the fiber is finite, all its points are enumerated. */
lt_status lt_fiber(const lt_tree* t, const char* coords_json, double eps,
                   int with_points, char** report_json);

/* Apply local sign switches at the listed inner nodes (comma separated
 * references) to an omega-chart parameter file. */
lt_status lt_switch(const lt_tree* t, const char* omega_params_json,
                    const char* nodes_csv, char** out_params_json);

/* Run the built-in suites (table1, roundtrip, psi, mobius, fiber); suite may
 * be NULL or empty for all. Returns a summary JSON and LT_ERR_INTERNAL when
 * any check fails. */
lt_status lt_selftest(const char* suite, unsigned long seed, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* LATREE_H */
