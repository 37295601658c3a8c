#ifndef PADIX_H
#define PADIX_H

/* Generated by cbindgen from padix-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a library call. Everything other than `Ok` leaves an
 * explanation in `padix_last_error`.
 */
enum PadixStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  PADIX_STATUS_OK = 0,
  PADIX_STATUS_PARSE = 1,
  PADIX_STATUS_PRECISION = 2,
  PADIX_STATUS_STABILIZATION = 3,
  PADIX_STATUS_WINDOW = 4,
  PADIX_STATUS_SEARCH_EXHAUSTED = 5,
  PADIX_STATUS_DOMAIN = 6,
  PADIX_STATUS_REFUSED = 7,
  PADIX_STATUS_UNVERIFIED_NONCONJUGACY = 8,
  PADIX_STATUS_UNSUPPORTED = 9,
  PADIX_STATUS_CONTRACT = 10,
  PADIX_STATUS_IO = 11,
  PADIX_STATUS_NULL_ARGUMENT = 12,
  PADIX_STATUS_INVALID_UTF8 = 13,
  PADIX_STATUS_PANIC = 14,
};
#ifndef __cplusplus
typedef int32_t PadixStatus;
#endif // __cplusplus

/**
 * Verdict of a minimal-pair certification.
 */
enum PadixVerdict
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  PADIX_VERDICT_CERTIFIED = 0,
  PADIX_VERDICT_REFUTED = 1,
  PADIX_VERDICT_UNKNOWN = 2,
};
#ifndef __cplusplus
typedef int32_t PadixVerdict;
#endif // __cplusplus

/**
 * An integer-valued polynomial ring configuration.
 */
typedef struct PadixConfig PadixConfig;

/**
 * An algebraic point loaded from a point document.
 */
typedef struct PadixPoint PadixPoint;

/**
 * A built sequence together with its valuation on Q(X).
 */
typedef struct PadixSequence PadixSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *padix_version(void);

/**
 * Explanation of the most recent failure on this thread; borrowed, valid
 * until the next library call on the same thread. Do not free.
 */
const char *padix_last_error(void);

/**
 * Releases a string returned through an out-parameter. Pass each string
 * at most once; it must have come from this library.
 */
void padix_string_free(char *s);

/**
 * Builds a sequence from a sequence-spec document.
 */
PadixStatus padix_sequence_build(const char *spec_text, struct PadixSequence **out);

/**
 * Loads a sequence document, replaying the build and rejecting any
 * document that does not match its deterministic rebuild.
 */
PadixStatus padix_sequence_read(const char *doc_text, struct PadixSequence **out);

/**
 * Renders the sequence document for a handle; free with padix_string_free.
 */
PadixStatus padix_sequence_render(const struct PadixSequence *h, char **out);

/**
 * Re-runs the invariant checks; writes how many passed and how many ran.
 */
PadixStatus padix_sequence_verify(const struct PadixSequence *h,
                                  size_t *out_passed,
                                  size_t *out_total);

/**
 * Number of stored levels, the zero level included.
 */
PadixStatus padix_sequence_level_count(const struct PadixSequence *h, size_t *out);

/**
 * Invariants (d, e, f) of one stored level.
 */
PadixStatus padix_sequence_level(const struct PadixSequence *h,
                                 size_t level,
                                 uint64_t *out_d,
                                 uint64_t *out_e,
                                 uint64_t *out_f);

/**
 * Stabilized valuation of a rational function, written as an exact
 * rational string; free with padix_string_free.
 */
PadixStatus padix_sequence_valuate(const struct PadixSequence *h,
                                   const char *query,
                                   char **out_value);

/**
 * Residue of a valuation-zero query, as "degree-over-fp=k coords=...";
 * free with padix_string_free.
 */
PadixStatus padix_sequence_residue(const struct PadixSequence *h,
                                   const char *query,
                                   char **out_residue);

/**
 * Releases a sequence handle; pass each handle at most once.
 */
void padix_sequence_free(struct PadixSequence *h);

/**
 * Loads an algebraic point from a point document.
 */
PadixStatus padix_point_read(const char *doc_text, struct PadixPoint **out);

/**
 * Supremum of conjugate distances, "-inf" for rational points; free with
 * padix_string_free.
 */
PadixStatus padix_point_omega(const struct PadixPoint *h, char **out_value);

/**
 * Certifies (x, delta) as a minimal pair; delta is an exact rational
 * string. The detail string cites the condition used; free it with
 * padix_string_free.
 */
PadixStatus padix_point_certify(const struct PadixPoint *h,
                                const char *delta,
                                PadixVerdict *out_verdict,
                                char **out_detail);

/**
 * Releases a point handle; pass each handle at most once.
 */
void padix_point_free(struct PadixPoint *h);

/**
 * Loads an integer-valued ring configuration document.
 */
PadixStatus padix_config_read(const char *doc_text, struct PadixConfig **out);

/**
 * Renders the class group, for example "Z/2Z (+) Z" or "0"; free with
 * padix_string_free.
 */
PadixStatus padix_config_class_group(const struct PadixConfig *h, char **out_group);

/**
 * Writes whether the configured ring is a principal ideal domain.
 */
PadixStatus padix_config_is_pid(const struct PadixConfig *h, bool *out_pid);

/**
 * Searches for a unit witness (n, d) with g(alpha)^n / d of valuation
 * zero at every supported prime. On success out_witnessed is true, out_n
 * holds n, and out_text holds d in decimal; otherwise out_witnessed is
 * false and out_text explains why no witness exists. Free out_text with
 * padix_string_free.
 */
PadixStatus padix_config_witness(const struct PadixConfig *h,
                                 const char *poly_text,
                                 bool *out_witnessed,
                                 uint64_t *out_n,
                                 char **out_text);

/**
 * Releases a configuration handle; pass each handle at most once.
 */
void padix_config_free(struct PadixConfig *h);

/**
 * Newton polygon of a polynomial over Q at a prime: writes the number of
 * roots at zero and the remaining root valuations in ascending order as a
 * space-separated string ("-" when empty). Free the string with
 * padix_string_free.
 */
PadixStatus padix_newton_root_valuations(uint64_t prime,
                                         const char *poly_text,
                                         size_t *out_zero_roots,
                                         char **out_valuations);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PADIX_H */
