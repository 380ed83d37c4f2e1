#ifndef INFOBAND_H
#define INFOBAND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IbAlternative {
  IB_ALTERNATIVE_TWO_SIDED = 0,
  IB_ALTERNATIVE_GREATER = 1,
  IB_ALTERNATIVE_LESS = 2,
} IbAlternative;

typedef enum IbMembership {
  IB_MEMBERSHIP_INSIDE = 0,
  IB_MEMBERSHIP_ABOVE = 1,
  IB_MEMBERSHIP_BELOW = 2,
} IbMembership;

typedef enum IbStatus {
  IB_STATUS_OK = 0,
  IB_STATUS_NULL_POINTER = 1,
  IB_STATUS_INVALID_UTF8 = 2,
  IB_STATUS_INVALID_ARGUMENT = 3,
  IB_STATUS_DATA_ERROR = 4,
  IB_STATUS_CAP_EXCEEDED = 5,
  IB_STATUS_PANIC = 6,
} IbStatus;

typedef enum IbStrategy {
  IB_STRATEGY_GREEDY = 0,
  IB_STRATEGY_BEAM = 1,
  IB_STRATEGY_DIVERSE_BEAM = 2,
  IB_STRATEGY_ANCESTRAL = 3,
  IB_STRATEGY_TOP_K = 4,
  IB_STRATEGY_NUCLEUS = 5,
  IB_STRATEGY_MBR = 6,
} IbStrategy;

/**
 * Opaque trained model.
 */
typedef struct IbModel IbModel;

typedef struct IbEntropyEstimate {
  double mean;
  double std_dev;
  double std_error;
  size_t samples;
} IbEntropyEstimate;

/**
 * Decoding parameters; fields a strategy does not use are ignored.
 */
typedef struct IbDecodeParams {
  enum IbStrategy strategy;
  /**
   * Beam width, diverse-beam total width, or top-k size.
   */
  size_t k;
  size_t groups;
  double lambda;
  double p;
  /**
   * MBR sample count.
   */
  size_t samples;
  /**
   * MBR n-gram order.
   */
  size_t max_n;
  uint64_t seed;
} IbDecodeParams;

typedef struct IbTTest {
  double t;
  double dof;
  double p_value;
} IbTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Trains a character n-gram model on `n_lines` strings.
 *
 * # Safety
 * `lines` must point to `n_lines` valid NUL-terminated strings; `out` must
 * be writable.
 */
enum IbStatus ib_model_train(const char *const *lines,
                             size_t n_lines,
                             size_t order,
                             double alpha,
                             size_t max_length,
                             struct IbModel **out);

/**
 * Loads a model from the JSON written by `ib_model_to_json`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be writable.
 */
enum IbStatus ib_model_from_json(const char *json, struct IbModel **out);

/**
 * Serializes a model; free the result with `ib_string_free`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum IbStatus ib_model_to_json(const struct IbModel *model, char **out);

/**
 * Number of symbols, not counting EOS.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum IbStatus ib_model_vocab_size(const struct IbModel *model, size_t *out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ib_model_free(struct IbModel *model);

/**
 * `log q(text | prompt)` in nats; `-inf` when the string has zero
 * probability.
 *
 * # Safety
 * Pointers must be valid; `prompt` may be null.
 */
enum IbStatus ib_log_prob(const struct IbModel *model,
                          const char *prompt,
                          const char *text,
                          double *out);

/**
 * Total and length-normalized information content of `text` (nats).
 *
 * # Safety
 * Pointers must be valid; `prompt` may be null.
 */
enum IbStatus ib_information(const struct IbModel *model,
                             const char *prompt,
                             const char *text,
                             double *total,
                             double *normalized);

/**
 * Exact entropy and information standard deviation by enumerating at most
 * `cap` strings.
 *
 * # Safety
 * Pointers must be valid; `prompt` may be null.
 */
enum IbStatus ib_exact_entropy(const struct IbModel *model,
                               const char *prompt,
                               size_t cap,
                               double *entropy,
                               double *std_dev);

/**
 * Monte Carlo entropy estimate from `samples` seeded ancestral draws.
 *
 * # Safety
 * Pointers must be valid; `prompt` may be null.
 */
enum IbStatus ib_mc_entropy(const struct IbModel *model,
                            const char *prompt,
                            size_t samples,
                            uint64_t seed,
                            struct IbEntropyEstimate *out);

/**
 * Default parameters of a strategy.
 */
struct IbDecodeParams ib_decode_params_default(enum IbStrategy strategy, uint64_t seed);

/**
 * Decodes one continuation; free `text` with `ib_string_free`.
 *
 * # Safety
 * Pointers must be valid; `prompt` may be null.
 */
enum IbStatus ib_decode(const struct IbModel *model,
                        const char *prompt,
                        const struct IbDecodeParams *params,
                        char **text,
                        double *log_prob);

/**
 * Where `information` falls relative to `[mean − std_dev, mean + std_dev]`.
 */
enum IbMembership ib_band_membership(double information, double mean, double std_dev);

/**
 * Welch (or paired) t-test.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` doubles; `out` must be writable.
 */
enum IbStatus ib_welch_t_test(const double *a,
                              size_t na,
                              const double *b,
                              size_t nb,
                              bool paired,
                              enum IbAlternative alternative,
                              struct IbTTest *out);

/**
 * Copy of the last error message on this thread, or null if the last call
 * succeeded. Free with `ib_string_free`.
 */
char *ib_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void ib_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFOBAND_H */
