#ifndef HUBO_FACTOR_H
#define HUBO_FACTOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfMethod {
  HF_METHOD_EXACT = 0,
  HF_METHOD_SA = 1,
  HF_METHOD_RANGE = 2,
  HF_METHOD_DECOMP = 3,
  HF_METHOD_QUBO_EXACT = 4,
  HF_METHOD_QUBO_SA = 5,
} HfMethod;

typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NOT_FOUND = 1,
  HF_STATUS_NULL_POINTER = 2,
  HF_STATUS_INVALID_ARGUMENT = 3,
  HF_STATUS_INVALID_NUMBER = 4,
  HF_STATUS_TOO_MANY_VARIABLES = 5,
  HF_STATUS_IO = 6,
  HF_STATUS_PARSE = 7,
  HF_STATUS_VERSION_MISMATCH = 8,
  HF_STATUS_BUFFER_TOO_SMALL = 9,
  HF_STATUS_AMBIGUOUS = 10,
  HF_STATUS_PANIC = 11,
} HfStatus;

// A factorization model, optionally with its quadratization ledger.
typedef struct HfModel HfModel;

typedef struct HfReport HfReport;

// Solve settings. Fill with [`hf_options_default`] and override fields.
typedef struct HfOptions {
  enum HfMethod method;
  // Bits per factor; 0 picks the default for `N`.
  uint32_t bits;
  bool fix_lsb;
  // Worker threads for block search and annealing; at least 1.
  uint32_t workers;
  uint64_t sweeps;
  uint64_t restarts;
  uint64_t seed;
  // Range-search stride as a decimal string, or NULL for `2^bits`.
  const char *stride;
  // Range-search block limit; 0 means unlimited.
  uint64_t max_blocks;
} HfOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf`.
//
// # Safety
// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
enum HfStatus hf_last_error_message(char *buf, size_t len, size_t *needed);

// Static, NUL-terminated library version.
const char *hf_version(void);

// # Safety
// `out` must be valid for writes.
enum HfStatus hf_options_default(struct HfOptions *out);

// Builds the plain model of `(pq - N)^2` with `bits` bits per factor.
//
// # Safety
// `n` must be a NUL-terminated string; `out` must be valid for writes.
enum HfStatus hf_model_build(const char *n, uint32_t bits, bool fix_lsb, struct HfModel **out);

// Builds the model restricted to `p in s_i + [0, 2^bits)`,
// `q in s_j + [0, 2^bits)`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be valid for writes.
enum HfStatus hf_model_build_range(const char *n,
                                   uint32_t bits,
                                   bool fix_lsb,
                                   const char *s_i,
                                   const char *s_j,
                                   struct HfModel **out);

// Quadratizes a model into a new handle carrying the reduction ledger.
//
// # Safety
// `model` must be a live handle; `out` must be valid for writes.
enum HfStatus hf_model_quadratize(const struct HfModel *model, struct HfModel **out);

// Variables of the model, ancillas included; 0 for NULL.
//
// # Safety
// `model` must be a live handle or NULL.
size_t hf_model_num_vars(const struct HfModel *model);

// # Safety
// `model` must be a live handle or NULL.
size_t hf_model_num_terms(const struct HfModel *model);

// # Safety
// `model` must be a live handle or NULL.
size_t hf_model_degree(const struct HfModel *model);

// # Safety
// `model` must be a live handle or NULL.
size_t hf_model_ancillas(const struct HfModel *model);

// Full-convention energy (`(pq - N)^2` plus any gadget penalty) of a
// 0/1 assignment, as a decimal string.
//
// # Safety
// `bits` must be valid for `len` bytes; `buf` for `buf_len` bytes or NULL.
enum HfStatus hf_model_energy(const struct HfModel *model,
                              const uint8_t *bits,
                              size_t len,
                              char *buf,
                              size_t buf_len,
                              size_t *needed);

// The model as JSON text.
//
// # Safety
// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
enum HfStatus hf_model_to_json(const struct HfModel *model, char *buf, size_t len, size_t *needed);

// # Safety
// `path` must be NUL-terminated.
enum HfStatus hf_model_save(const struct HfModel *model, const char *path);

// # Safety
// `path` must be NUL-terminated; `out` must be valid for writes.
enum HfStatus hf_model_load(const char *path, struct HfModel **out);

// Releases a model; NULL is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void hf_model_free(struct HfModel *model);

// Factors `N`. Returns `HF_STATUS_OK` with a report whether or not factors
// were found; check [`hf_report_found`].
//
// # Safety
// `n` must be NUL-terminated; `options` may be NULL for defaults; `out`
// must be valid for writes.
enum HfStatus hf_factor(const char *n, const struct HfOptions *options, struct HfReport **out);

// # Safety
// `report` must be a live handle or NULL.
bool hf_report_found(const struct HfReport *report);

// # Safety
// `report` must be a live handle or NULL.
size_t hf_report_qubits(const struct HfReport *report);

// # Safety
// `report` must be a live handle or NULL.
size_t hf_report_ancillas(const struct HfReport *report);

// Copies the factor `p` (`which == 0`) or `q` (`which == 1`), `p <= q`.
// Returns `HF_STATUS_NOT_FOUND` when no factorization was found.
//
// # Safety
// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
enum HfStatus hf_report_factor(const struct HfReport *report,
                               uint32_t which,
                               char *buf,
                               size_t len,
                               size_t *needed);

// Lowest energy found with the constant term dropped.
//
// # Safety
// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
enum HfStatus hf_report_energy_paper(const struct HfReport *report,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

// The whole report as JSON.
//
// # Safety
// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
enum HfStatus hf_report_to_json(const struct HfReport *report,
                                char *buf,
                                size_t len,
                                size_t *needed);

// Releases a report; NULL is ignored.
//
// # Safety
// `report` must come from this library and not be used afterwards.
void hf_report_free(struct HfReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HUBO_FACTOR_H */
