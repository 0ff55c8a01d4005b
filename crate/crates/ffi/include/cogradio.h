#ifndef COGRADIO_H
#define COGRADIO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_INFEASIBLE = 3,
  CG_STATUS_NUMERICAL = 4,
  CG_STATUS_BUFFER_TOO_SMALL = 5,
  CG_STATUS_PANIC = 6,
} CgStatus;

/**
 * Selects one matrix of a design.
 */
typedef enum CgMatrix {
  CG_MATRIX_RELAY = 0,
  CG_MATRIX_FEEDBACK = 1,
  CG_MATRIX_TRANSMIT = 2,
  CG_MATRIX_RECEIVE = 3,
} CgMatrix;

/**
 * Opaque set of four channel matrices.
 */
typedef struct CgChannels CgChannels;

/**
 * Opaque transceiver design with its figures of merit.
 */
typedef struct CgDesign CgDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cg_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cg_version(void);

/**
 * The fixed 2×2 reference channels.
 *
 * # Safety
 * `out` must be a valid pointer to writable handle storage.
 */
enum CgStatus cg_channels_reference(struct CgChannels **out);

/**
 * Parses a channel set from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid handle storage.
 */
enum CgStatus cg_channels_from_json(const char *json, struct CgChannels **out);

/**
 * Builds a channel set from four `n×n` matrices, each given as row-major
 * real and imaginary arrays of length `n*n`, in the order `H13, H14, H23,
 * H24`.
 *
 * # Safety
 * `re` and `im` must each point to `4*n*n` readable doubles and `out` to
 * valid handle storage.
 */
enum CgStatus cg_channels_new(size_t n,
                              const double *re,
                              const double *im,
                              struct CgChannels **out);

/**
 * Antennas per node, or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t cg_channels_n_t(const struct CgChannels *ch);

/**
 * # Safety
 * `ch` must be null or a handle not yet freed.
 */
void cg_channels_free(struct CgChannels *ch);

/**
 * Joint THP design by successive convex approximation. Powers are linear.
 *
 * # Safety
 * `ch` must be a live handle and `out` valid handle storage.
 */
enum CgStatus cg_joint_design(const struct CgChannels *ch,
                              double p_p,
                              double p_t,
                              struct CgDesign **out);

/**
 * Generalized zero-forcing baseline with the default grid.
 *
 * # Safety
 * `ch` must be a live handle and `out` valid handle storage.
 */
enum CgStatus cg_gzf_design(const struct CgChannels *ch,
                            double p_p,
                            double p_t,
                            struct CgDesign **out);

/**
 * Sum MSE of a design, NaN for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
double cg_design_smse(const struct CgDesign *d);

/**
 * Coexistence gap in bits, NaN for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
double cg_design_gap(const struct CgDesign *d);

/**
 * Whether the iteration met its stopping rule.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
bool cg_design_converged(const struct CgDesign *d);

/**
 * Copies one `n×n` matrix of the design into row-major `re`/`im` buffers
 * of length `len`. Fails with `BufferTooSmall` when `len < n*n`.
 *
 * # Safety
 * `d` must be a live handle; `re` and `im` must point to `len` writable
 * doubles.
 */
enum CgStatus cg_design_matrix(const struct CgDesign *d,
                               enum CgMatrix which,
                               double *re,
                               double *im,
                               size_t len);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void cg_design_free(struct CgDesign *d);

/**
 * Closed-form MIMO relay-ratio approximation. Powers are linear.
 *
 * # Safety
 * `ch` must be a live handle and `out` a writable double.
 */
enum CgStatus cg_relay_ratio(const struct CgChannels *ch, double p_p, double p_t, double *out);

/**
 * Exact SISO relay ratio for PU and SU link powers `p1`, `p2`.
 *
 * # Safety
 * `out` must be a writable double.
 */
enum CgStatus cg_siso_relay_ratio(double p1, double p2, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COGRADIO_H */
