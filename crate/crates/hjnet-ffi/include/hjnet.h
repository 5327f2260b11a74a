#ifndef HJNET_H
#define HJNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum HjnStatus {
  HjnOk = 0,
  HjnInvalidArgument = 1,
  HjnSchemaError = 2,
  HjnGraphInvalid = 3,
  HjnNumericalError = 4,
  HjnInternalError = 5,
} HjnStatus;

/**
 * Opaque parsed network handle.
 */
typedef struct HjnNetwork HjnNetwork;

/**
 * Opaque vertex solution handle.
 */
typedef struct HjnSolution HjnSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON network description. On success stores a handle in `out`;
 * release it with hjnet_network_free.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum HjnStatus hjnet_network_parse(const char *json, struct HjnNetwork **out);

/**
 * # Safety
 * `net` must be a handle from hjnet_network_parse (or null).
 */
void hjnet_network_free(struct HjnNetwork *net);

/**
 * # Safety
 * `net` must be a valid handle.
 */
uintptr_t hjnet_network_vertex_count(const struct HjnNetwork *net);

/**
 * Number of oriented edges (twice the arc count).
 *
 * # Safety
 * `net` must be a valid handle.
 */
uintptr_t hjnet_network_edge_count(const struct HjnNetwork *net);

/**
 * Solves the discrete functional equation. `lambda <= 0` uses the file's
 * solver configuration. Release the solution with hjnet_solution_free.
 *
 * # Safety
 * `net` must be a valid handle and `out` a valid pointer.
 */
enum HjnStatus hjnet_solve(const struct HjnNetwork *net, double lambda, struct HjnSolution **out);

/**
 * # Safety
 * `sol` must be a handle from hjnet_solve (or null).
 */
void hjnet_solution_free(struct HjnSolution *sol);

/**
 * Vertex value by name.
 *
 * # Safety
 * Pointers must be valid; `vertex` NUL-terminated.
 */
enum HjnStatus hjnet_solution_value(const struct HjnSolution *sol, const char *vertex, double *out);

/**
 * # Safety
 * `sol` must be a valid handle.
 */
double hjnet_solution_residual(const struct HjnSolution *sol);

/**
 * # Safety
 * `sol` must be a valid handle.
 */
uintptr_t hjnet_solution_iterations(const struct HjnSolution *sol);

/**
 * JSON rendering of a solution; free with hjnet_string_free.
 *
 * # Safety
 * `sol` must be a valid handle.
 */
char *hjnet_solution_to_json(const struct HjnSolution *sol);

/**
 * Edge map value rho(alpha, e) for one oriented edge name.
 *
 * # Safety
 * Pointers must be valid; `edge` NUL-terminated.
 */
enum HjnStatus hjnet_rho_edge(const struct HjnNetwork *net,
                              double lambda,
                              const char *edge,
                              double alpha,
                              double *out);

/**
 * Fixed point of the cycle given as comma-separated oriented edge names.
 *
 * # Safety
 * Pointers must be valid; `cycle` NUL-terminated.
 */
enum HjnStatus hjnet_beta_cycle(const struct HjnNetwork *net,
                                double lambda,
                                const char *cycle,
                                double *out);

/**
 * rho along a path of comma-separated oriented edge names.
 *
 * # Safety
 * Pointers must be valid; `path` NUL-terminated.
 */
enum HjnStatus hjnet_rho_path(const struct HjnNetwork *net,
                              double lambda,
                              const char *path,
                              double alpha,
                              double *out);

/**
 * Critical level of the limit equation on this network.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HjnStatus hjnet_critical_value(const struct HjnNetwork *net, double *out);

/**
 * Full limit-layer report (critical value, per-edge weights, distinguished
 * set) as JSON; free with hjnet_string_free.
 *
 * # Safety
 * `net` must be a valid handle.
 */
char *hjnet_eikonal_json(const struct HjnNetwork *net);

/**
 * Last error message on this thread; free with hjnet_string_free. Null when
 * no error has occurred.
 */
char *hjnet_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library (or be null).
 */
void hjnet_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HJNET_H */
