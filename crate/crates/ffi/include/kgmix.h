#ifndef KGMIX_H
#define KGMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KgmixStatus {
  KGMIX_STATUS_OK = 0,
  KGMIX_STATUS_NULL_POINTER = 1,
  KGMIX_STATUS_INVALID_ARGUMENT = 2,
  KGMIX_STATUS_CONFIG_ERROR = 3,
  KGMIX_STATUS_DATA_ERROR = 4,
  KGMIX_STATUS_RUNTIME_ERROR = 5,
  KGMIX_STATUS_INCOMPATIBLE = 6,
  KGMIX_STATUS_OUT_OF_RANGE = 7,
  KGMIX_STATUS_PANIC = 8,
} KgmixStatus;

typedef enum KgmixSplit {
  KGMIX_SPLIT_TRAIN = 0,
  KGMIX_SPLIT_VALID = 1,
  KGMIX_SPLIT_TEST = 2,
} KgmixSplit;

/**
 * Opaque prepared dataset with its degree index and filter set.
 */
typedef struct KgmixDataset KgmixDataset;

/**
 * Opaque model: parameters plus the config that produced them.
 */
typedef struct KgmixModel KgmixModel;

typedef struct KgmixMetrics {
  size_t count;
  double mrr;
  double hits1;
  double hits3;
  double hits10;
} KgmixMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *kgmix_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kgmix_version(void);

/**
 * Opens a directory written by `kgmix prepare`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KgmixStatus kgmix_dataset_open(const char *dir, struct KgmixDataset **out);

/**
 * # Safety
 * `ds` must come from [`kgmix_dataset_open`] and not be used afterwards. Null is ignored.
 */
void kgmix_dataset_free(struct KgmixDataset *ds);

/**
 * Entity and relation counts (relations include inverses).
 *
 * # Safety
 * `ds` must be a live dataset handle; outputs must be valid pointers.
 */
enum KgmixStatus kgmix_dataset_sizes(const struct KgmixDataset *ds,
                                     size_t *num_entities,
                                     size_t *num_relations);

/**
 * Looks up an entity id by name.
 *
 * # Safety
 * `ds` must be a live dataset handle, `name` NUL-terminated, `out` valid.
 */
enum KgmixStatus kgmix_entity_id(const struct KgmixDataset *ds, const char *name, size_t *out);

/**
 * Looks up a relation id by name (`<name>__inv` for inverses).
 *
 * # Safety
 * `ds` must be a live dataset handle, `name` NUL-terminated, `out` valid.
 */
enum KgmixStatus kgmix_relation_id(const struct KgmixDataset *ds, const char *name, size_t *out);

/**
 * Number of training triples `(·, relation, tail)`.
 *
 * # Safety
 * `ds` must be a live dataset handle and `out` valid.
 */
enum KgmixStatus kgmix_tail_relation_degree(const struct KgmixDataset *ds,
                                            size_t tail,
                                            size_t relation,
                                            size_t *out);

/**
 * Loads a checkpoint written by `kgmix train`.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` valid.
 */
enum KgmixStatus kgmix_model_load(const char *path, struct KgmixModel **out);

/**
 * Trains a model on `ds`. `config_text` holds `key = value` lines applied on top
 * of the desk-scale settings; null means those settings unchanged. The model
 * holds the averaged parameters when averaging ran, the final ones otherwise.
 *
 * # Safety
 * `ds` must be a live dataset handle, `config_text` null or NUL-terminated, `out` valid.
 */
enum KgmixStatus kgmix_model_train(const struct KgmixDataset *ds,
                                   const char *config_text,
                                   struct KgmixModel **out);

/**
 * Writes the model in checkpoint format.
 *
 * # Safety
 * `model` must be a live model handle and `path` NUL-terminated.
 */
enum KgmixStatus kgmix_model_save(const struct KgmixModel *model, const char *path);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void kgmix_model_free(struct KgmixModel *model);

/**
 * Score `f(head, relation, tail)` (a logit).
 *
 * # Safety
 * `model` must be a live model handle and `out` valid.
 */
enum KgmixStatus kgmix_model_score(const struct KgmixModel *model,
                                   size_t head,
                                   size_t relation,
                                   size_t tail,
                                   double *out);

/**
 * Scores every entity as tail of `(head, relation)` into `out[0..len]`;
 * `len` must equal the entity count.
 *
 * # Safety
 * `model` must be a live model handle and `out` point to `len` writable doubles.
 */
enum KgmixStatus kgmix_model_score_all(const struct KgmixModel *model,
                                       size_t head,
                                       size_t relation,
                                       double *out,
                                       size_t len);

/**
 * Filtered tail-prediction metrics over one split (a [`KgmixSplit`] value;
 * inverse queries included), ties at their mean rank.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum KgmixStatus kgmix_evaluate(const struct KgmixModel *model,
                                const struct KgmixDataset *ds,
                                uint32_t split,
                                struct KgmixMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGMIX_H */
