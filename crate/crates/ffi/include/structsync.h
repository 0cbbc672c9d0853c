#ifndef STRUCTSYNC_H
#define STRUCTSYNC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_ARGUMENT = 1,
  SS_STATUS_PARSE = 2,
  SS_STATUS_BUDGET = 3,
  SS_STATUS_INVALID = 4,
  SS_STATUS_OVERFLOW = 5,
  SS_STATUS_PANIC = 6,
} SsStatus;

/**
 * A parsed interconnection.
 */
typedef struct SsInterconnection SsInterconnection;

/**
 * Outcome of the strong structural synchronization test.
 */
typedef struct SsSssVerdict SsSssVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library; valid until the next call.
 */
const char *ss_last_error(void);

/**
 * Parses the text interconnection format.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum SsStatus ss_interconnection_parse(const char *text, struct SsInterconnection **out);

/**
 * # Safety
 * `ic` is null or came from [`ss_interconnection_parse`] and is not used again.
 */
void ss_interconnection_free(struct SsInterconnection *ic);

/**
 * Vertex count, dissipative and restorative edge counts.
 *
 * # Safety
 * `ic` is a live handle; the outputs are writable or null.
 */
enum SsStatus ss_interconnection_shape(const struct SsInterconnection *ic,
                                       size_t *q,
                                       size_t *dissipative,
                                       size_t *restorative);

/**
 * # Safety
 * `ic` is a live handle; `out` is writable.
 */
enum SsStatus ss_is_ss(const struct SsInterconnection *ic, bool *out);

/**
 * Runs the sign-pattern search. `budget` caps the restorative edge count;
 * `jobs` of zero uses every core.
 *
 * # Safety
 * `ic` is a live handle; `out` is writable.
 */
enum SsStatus ss_is_sss(const struct SsInterconnection *ic,
                        size_t budget,
                        size_t jobs,
                        struct SsSssVerdict **out);

/**
 * # Safety
 * `v` is null or came from [`ss_is_sss`] and is not used again.
 */
void ss_sss_verdict_free(struct SsSssVerdict *v);

/**
 * # Safety
 * `v` is a live handle.
 */
bool ss_sss_verdict_holds(const struct SsSssVerdict *v);

/**
 * # Safety
 * `v` is a live handle.
 */
uint64_t ss_sss_verdict_refuted(const struct SsSssVerdict *v);

/**
 * Entries of the sign witness, one per restorative edge, into `buf`.
 * `len` receives the witness length, zero when there is none; call with a
 * null `buf` to query it.
 *
 * # Safety
 * `v` is a live handle; `buf` is null or holds `cap` values; `len` is writable.
 */
enum SsStatus ss_sss_verdict_witness(const struct SsSssVerdict *v,
                                     int64_t *buf,
                                     size_t cap,
                                     size_t *len);

/**
 * Real part of the second eigenvalue of `D + jR` for the given weights,
 * listed in file order of each edge kind.
 *
 * # Safety
 * `ic` is a live handle; the weight arrays hold one value per edge of
 * their kind; `out` is writable.
 */
enum SsStatus ss_margin(const struct SsInterconnection *ic,
                        const double *d_weights,
                        size_t d_len,
                        const double *r_weights,
                        size_t r_len,
                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRUCTSYNC_H */
