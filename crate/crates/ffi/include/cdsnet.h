#ifndef CDSNET_H
#define CDSNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CDS_STATUS_OK = 0,
  CDS_STATUS_NULL_POINTER = 1,
  CDS_STATUS_INVALID_UTF8 = 2,
  CDS_STATUS_PARSE = 3,
  CDS_STATUS_INVALID_NETWORK = 4,
  CDS_STATUS_INVALID_ARGUMENT = 5,
  CDS_STATUS_LENGTH_MISMATCH = 6,
  /**
   * The search ended without a vector; nothing is claimed about existence.
   */
  CDS_STATUS_NOT_FOUND = 7,
  /**
   * No clearing vector exists.
   */
  CDS_STATUS_INFEASIBLE = 8,
  CDS_STATUS_UNDECIDED = 9,
  CDS_STATUS_NOT_APPROX_CLEARING = 10,
  CDS_STATUS_PANIC = 11,
} CdsStatus;

/**
 * Opaque handle to a network compiled from a circuit, with its wire map.
 */
typedef struct CdsCircuitNetwork CdsCircuitNetwork;

/**
 * Opaque network handle.
 */
typedef struct CdsNetwork CdsNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *cdsnet_last_error(void);

/**
 * Parses a JSON network document into a new handle.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
CdsStatus cdsnet_network_from_json(const char *json, CdsNetwork **out);

/**
 * # Safety
 * `net` must come from this library and not be used afterwards. Null is ignored.
 */
void cdsnet_network_free(CdsNetwork *net);

/**
 * # Safety
 * `net` must be a live handle, `out` writable.
 */
CdsStatus cdsnet_network_len(const CdsNetwork *net, size_t *out);

/**
 * Serializes to JSON. Free the string with [`cdsnet_string_free`].
 *
 * # Safety
 * `net` must be a live handle, `out` writable.
 */
CdsStatus cdsnet_network_to_json(const CdsNetwork *net, char **out);

/**
 * # Safety
 * `s` must come from this library. Null is ignored.
 */
void cdsnet_string_free(char *s);

/**
 * One application of the update map: `out = F(r)`.
 *
 * # Safety
 * `r` and `out` must hold `len` doubles.
 */
CdsStatus cdsnet_update_f(const CdsNetwork *net, const double *r, size_t len, double *out);

/**
 * `*out = ||F(r) - r||_inf <= tol`.
 *
 * # Safety
 * `r` must hold `len` doubles; `out` writable.
 */
CdsStatus cdsnet_is_clearing(const CdsNetwork *net,
                             const double *r,
                             size_t len,
                             double tol,
                             bool *out);

/**
 * # Safety
 * `r` must hold `len` doubles; `out` writable.
 */
CdsStatus cdsnet_is_eps_approx_clearing(const CdsNetwork *net,
                                        const double *r,
                                        size_t len,
                                        double eps,
                                        bool *out);

/**
 * Damped iteration of the update map from `r0`. On `Ok`, `out` holds a
 * clearing vector. `residual` may be null.
 *
 * # Safety
 * `r0` and `out` must hold `len` doubles.
 */
CdsStatus cdsnet_iterate(const CdsNetwork *net,
                         const double *r0,
                         size_t len,
                         double damping,
                         size_t max_iter,
                         double tol,
                         double *out,
                         double *residual);

/**
 * Solvency-pattern search. Returns `Ok` with a clearing vector in `out`,
 * `Infeasible` when no clearing vector exists, or `Undecided`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
CdsStatus cdsnet_enumerate_patterns(const CdsNetwork *net, double tol, double *out, size_t len);

/**
 * Restart search for an `eps`-approximate clearing vector.
 *
 * # Safety
 * `out` must hold `len` doubles. `residual` may be null.
 */
CdsStatus cdsnet_solve_eps_approx(const CdsNetwork *net,
                                  double eps,
                                  size_t restarts,
                                  size_t max_iter,
                                  uint64_t seed,
                                  double *out,
                                  size_t len,
                                  double *residual);

/**
 * Compiles a JSON circuit document.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
CdsStatus cdsnet_compile_circuit_json(const char *json, CdsCircuitNetwork **out);

/**
 * # Safety
 * `art` must come from this library and not be used afterwards. Null is ignored.
 */
void cdsnet_circuit_network_free(CdsCircuitNetwork *art);

/**
 * A new network handle holding a copy of the compiled network.
 *
 * # Safety
 * `art` must be a live handle, `out` writable.
 */
CdsStatus cdsnet_circuit_network_network(const CdsCircuitNetwork *art, CdsNetwork **out);

/**
 * Number of wires in the source circuit.
 *
 * # Safety
 * `art` must be a live handle, `out` writable.
 */
CdsStatus cdsnet_circuit_network_wire_count(const CdsCircuitNetwork *art, size_t *out);

/**
 * Decodes every wire from an approximately clearing vector `r` into
 * `values` (0, 1, or 2 for the undetermined value), in wire order.
 *
 * # Safety
 * `r` must hold the network's bank count, `values` the wire count.
 */
CdsStatus cdsnet_circuit_network_decode(const CdsCircuitNetwork *art,
                                        const double *r,
                                        size_t len,
                                        uint8_t *values,
                                        size_t wire_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDSNET_H */
