#ifndef INTENSION_H
#define INTENSION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum IntensionStatus {
  IntensionStatus_Ok = 0,
  /**
   * A pointer argument was NULL.
   */
  IntensionStatus_NullPointer = 1,
  /**
   * An argument failed validation or parsing.
   */
  IntensionStatus_InvalidArgument = 2,
  /**
   * The task admits no valid model.
   */
  IntensionStatus_NoModel = 3,
  /**
   * A search or enumeration budget was exceeded.
   */
  IntensionStatus_BudgetExceeded = 4,
  /**
   * Any other library error; see `intension_last_error`.
   */
  IntensionStatus_Internal = 5,
} IntensionStatus;

/**
 * Opaque search-outcome handle.
 */
typedef struct IntensionOutcome IntensionOutcome;

/**
 * Opaque task handle.
 */
typedef struct IntensionTask IntensionTask;

/**
 * Opaque vocabulary handle.
 */
typedef struct IntensionVocabulary IntensionVocabulary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (capacity
 * `len`, NUL-terminated, truncated if needed). Returns the number of
 * bytes required including the NUL.
 */
uintptr_t intension_last_error(char *buf, uintptr_t len);

/**
 * Build a vocabulary from a preset name (`literals`, `literals+eq`,
 * `depth2`, `equations`, `rich`) over a `bit_count`-bit state space.
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be valid.
 */
enum IntensionStatus intension_vocabulary_new(const char *preset,
                                              uint32_t bit_count,
                                              struct IntensionVocabulary **out);

/**
 * Number of distinct programs in the vocabulary.
 */
uintptr_t intension_vocabulary_len(const struct IntensionVocabulary *vocab);

/**
 * # Safety
 * `vocab` must be a handle from `intension_vocabulary_new`, or NULL.
 */
void intension_vocabulary_free(struct IntensionVocabulary *vocab);

/**
 * Build the binary-arithmetic parent task: `operation` 0 is addition,
 * 1 is multiplication; `deleted_bit` in 0..8 is withheld from
 * situations. The vocabulary must be over an 8-bit space.
 *
 * # Safety
 * `vocab` must be a live vocabulary handle; `out` must be valid.
 */
enum IntensionStatus intension_arithmetic_parent(const struct IntensionVocabulary *vocab,
                                                 uint32_t operation,
                                                 uint32_t deleted_bit,
                                                 struct IntensionTask **out);

/**
 * Number of correct decisions in the task.
 */
uintptr_t intension_task_decision_count(const struct IntensionTask *task);

/**
 * Sample a child task with `dk` decisions, deterministically from
 * `seed`.
 *
 * # Safety
 * `task` must be a live task handle; `out` must be valid.
 */
enum IntensionStatus intension_sample_child(const struct IntensionTask *task,
                                            uintptr_t dk,
                                            uint64_t seed,
                                            struct IntensionTask **out);

/**
 * # Safety
 * `task` must be a handle from this library, or NULL.
 */
void intension_task_free(struct IntensionTask *task);

/**
 * Search the task for a model: `proxy` 0 maximises weakness, 1
 * minimises description length. Ties are drawn uniformly from `seed`.
 *
 * # Safety
 * `task` must be a live task handle; `out` must be valid.
 */
enum IntensionStatus intension_search(const struct IntensionTask *task,
                                      uint32_t proxy,
                                      uint64_t seed,
                                      struct IntensionOutcome **out);

/**
 * Number of models tied at the best score.
 */
uintptr_t intension_outcome_model_count(const struct IntensionOutcome *outcome);

/**
 * Copy the chosen model's space-separated program labels into `buf`.
 * Returns the bytes required including the NUL.
 */
uintptr_t intension_outcome_chosen(const struct IntensionOutcome *outcome,
                                   char *buf,
                                   uintptr_t len);

/**
 * Copy the labels of the `index`-th tied model into `buf`. Returns 0
 * when the index is out of range.
 */
uintptr_t intension_outcome_model(const struct IntensionOutcome *outcome,
                                  uintptr_t index,
                                  char *buf,
                                  uintptr_t len);

/**
 * Copy the score (an integer, or a decimal bound) into `buf`.
 */
uintptr_t intension_outcome_score(const struct IntensionOutcome *outcome, char *buf, uintptr_t len);

/**
 * Copy the weakness tier used (`exact`, `closed`, `bound`, `state`)
 * into `buf`.
 */
uintptr_t intension_outcome_tier(const struct IntensionOutcome *outcome, char *buf, uintptr_t len);

/**
 * # Safety
 * `outcome` must be a handle from `intension_search`, or NULL.
 */
void intension_outcome_free(struct IntensionOutcome *outcome);

/**
 * Run a full experiment sweep from a TOML config (empty string means
 * the defaults) and return the CSV report as a heap string; release
 * it with `intension_string_free`.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be valid.
 */
enum IntensionStatus intension_experiment_run(const char *config_toml, char **out);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void intension_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* INTENSION_H */
