#ifndef LEXALIGN_H
#define LEXALIGN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  LX_STATUS_OK = 0,
  /**
   * File could not be read or written.
   */
  LX_STATUS_IO = 1,
  /**
   * Input file or argument failed to parse or validate.
   */
  LX_STATUS_PARSE = 2,
  /**
   * The two vocabularies share no tokens.
   */
  LX_STATUS_NO_OVERLAP = 3,
  /**
   * Dimensions of the operands disagree.
   */
  LX_STATUS_DIM_MISMATCH = 4,
  /**
   * Degenerate fit input (e.g. all source rows identical).
   */
  LX_STATUS_DEGENERATE = 5,
  /**
   * Null pointer or out-of-range scalar argument.
   */
  LX_STATUS_INVALID_ARGUMENT = 6,
  /**
   * Lookup key not present.
   */
  LX_STATUS_NOT_FOUND = 7,
  /**
   * Internal failure (a bug; the message carries details).
   */
  LX_STATUS_INTERNAL = 8,
} LxStatus;

/**
 * Which collection an embedding set belongs to.
 */
typedef enum {
  LX_COLLECTION_TWEET = 0,
  LX_COLLECTION_NEWS = 1,
} LxCollection;

/**
 * Transformation orientation.
 */
typedef enum {
  LX_DIRECTION_T2N = 0,
  LX_DIRECTION_N2T = 1,
} LxDirection;

/**
 * RBO estimate variant.
 */
typedef enum {
  LX_RBO_VARIANT_EXTRAPOLATED = 0,
  LX_RBO_VARIANT_MIN = 1,
} LxRboVariant;

/**
 * Opaque embedding-set handle.
 */
typedef struct LxEmbeddings LxEmbeddings;

/**
 * Opaque alignment-model handle.
 */
typedef struct LxModel LxModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on the calling thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *lx_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lx_version(void);

/**
 * Loads an embedding set from a plain-text file. On success `*out` owns
 * the new handle; release it with `lx_embeddings_free`.
 *
 * # Safety
 * `path` and `language` must be valid NUL-terminated strings and `out` a
 * valid pointer.
 */
LxStatus lx_embeddings_load(const char *path,
                            const char *language,
                            LxCollection collection,
                            LxEmbeddings **out);

/**
 * Writes an embedding set to a plain-text file.
 *
 * # Safety
 * `set` must be a live handle from this library; `path` a valid string.
 */
LxStatus lx_embeddings_save(const LxEmbeddings *set, const char *path);

/**
 * Releases an embedding-set handle; a null pointer is a no-op.
 *
 * # Safety
 * `set` must be null or a live handle, and must not be used afterwards.
 */
void lx_embeddings_free(LxEmbeddings *set);

/**
 * Number of tokens, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t lx_embeddings_len(const LxEmbeddings *set);

/**
 * Embedding dimension, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t lx_embeddings_dim(const LxEmbeddings *set);

/**
 * Copies the vector of `token` into `out_vec` (length `len`, which must
 * equal the set's dimension). Absence is reported as `NotFound`.
 *
 * # Safety
 * `out_vec` must point to `len` writable doubles.
 */
LxStatus lx_embeddings_lookup(const LxEmbeddings *set,
                              const char *token,
                              double *out_vec,
                              size_t len);

/**
 * Fits an alignment model over the common vocabulary of `source` (tweet
 * side) and `target` (news side). `top_f = 0` keeps the whole common
 * vocabulary. On success `*out` owns the model handle.
 *
 * # Safety
 * All handles must be live and `out` a valid pointer.
 */
LxStatus lx_align_fit(const LxEmbeddings *source,
                      const LxEmbeddings *target,
                      size_t top_f,
                      LxDirection direction,
                      LxModel **out);

/**
 * Applies a fitted model to every row of a set, producing a new handle.
 *
 * # Safety
 * All handles must be live and `out` a valid pointer.
 */
LxStatus lx_align_apply(const LxModel *model, const LxEmbeddings *set, LxEmbeddings **out);

/**
 * Serializes a model to its structured text format.
 *
 * # Safety
 * `model` must be a live handle; `path` a valid string.
 */
LxStatus lx_model_save(const LxModel *model, const char *path);

/**
 * Loads a model from its structured text format.
 *
 * # Safety
 * `path` must be a valid string and `out` a valid pointer.
 */
LxStatus lx_model_load(const char *path, LxModel **out);

/**
 * Releases a model handle; a null pointer is a no-op.
 *
 * # Safety
 * `model` must be null or a live handle, and must not be used afterwards.
 */
void lx_model_free(LxModel *model);

/**
 * Model dimension, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t lx_model_dim(const LxModel *model);

/**
 * Fitted scale factor, or NaN for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
double lx_model_scale(const LxModel *model);

/**
 * Frobenius residual of the fit, or NaN for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
double lx_model_residual(const LxModel *model);

/**
 * Extrapolated (or minimum) rank-biased overlap of two token rankings.
 * The lists are arrays of NUL-terminated UTF-8 strings.
 *
 * # Safety
 * `a` and `b` must point to `a_len` / `b_len` valid string pointers and
 * `out` to a writable double.
 */
LxStatus lx_rbo(const char *const *a,
                size_t a_len,
                const char *const *b,
                size_t b_len,
                double p,
                LxRboVariant variant,
                double *out);

/**
 * Cosine similarity of two `len`-dimensional vectors, clamped to [-1, 1].
 *
 * # Safety
 * `u` and `v` must point to `len` readable doubles and `out` to a
 * writable double.
 */
LxStatus lx_cosine(const double *u, const double *v, size_t len, double *out);

/**
 * Number of tokens shared by the two sets' vocabularies.
 *
 * # Safety
 * Both handles must be live.
 */
size_t lx_common_vocab_size(const LxEmbeddings *source, const LxEmbeddings *target);

/**
 * Copies the token at `rank` into `buffer` (capacity `buffer_len`,
 * including the NUL). Reports `NotFound` past the end and `DimMismatch`
 * when the buffer is too small; `*written` receives the byte count
 * excluding the NUL.
 *
 * # Safety
 * `buffer` must point to `buffer_len` writable bytes.
 */
LxStatus lx_embeddings_token(const LxEmbeddings *set,
                             size_t rank,
                             char *buffer,
                             size_t buffer_len,
                             size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEXALIGN_H */
