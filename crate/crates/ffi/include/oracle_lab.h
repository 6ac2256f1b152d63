#ifndef ORACLE_LAB_H
#define ORACLE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum OlStatus {
  OL_STATUS_OK = 0,
  OL_STATUS_NULL_POINTER = 1,
  OL_STATUS_INVALID_UTF8 = 2,
  OL_STATUS_PARSE_ERROR = 3,
  OL_STATUS_ILLEGAL_TRANSITION = 4,
  OL_STATUS_INVALID_ARGUMENT = 5,
  OL_STATUS_MISMATCH = 6,
  OL_STATUS_PANIC = 7,
} OlStatus;

/**
 * Transition system selector.
 */
typedef enum OlStrategy {
  OL_STRATEGY_TOP_DOWN = 0,
  OL_STRATEGY_IN_ORDER = 1,
} OlStrategy;

/**
 * A parser configuration.
 */
typedef struct OlConfig OlConfig;

/**
 * Gold reference for one tree under one strategy.
 */
typedef struct OlGold OlGold;

/**
 * A parsed constituent tree.
 */
typedef struct OlTree OlTree;

/**
 * Loss of a configuration and its four terms.
 */
typedef struct OlLoss {
  size_t total;
  size_t unreachable;
  size_t false_constituents;
  size_t false_open_nts;
  size_t out_of_order;
} OlLoss;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ol_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ol_string_free(char *s);

/**
 * Parses one bracketed tree into `*out`.
 *
 * # Safety
 * `text_ptr` must be a NUL-terminated string; `out` must be writable.
 */
enum OlStatus ol_tree_parse(const char *text_ptr, struct OlTree **out);

/**
 * Number of tokens of a tree, or 0 for NULL.
 *
 * # Safety
 * `tree` must be NULL or a live handle.
 */
size_t ol_tree_len(const struct OlTree *tree);

/**
 * Space-separated gold transition sequence, e.g. "NT_S SH RE".
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable. Free the result
 * with [`ol_string_free`].
 */
enum OlStatus ol_gold_sequence(const struct OlTree *tree, enum OlStrategy strategy, char **out);

/**
 * # Safety
 * `tree` must be NULL or a handle not yet freed.
 */
void ol_tree_free(struct OlTree *tree);

/**
 * Gold reference for `tree`; the tree may be freed afterwards.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum OlStatus ol_gold_new(const struct OlTree *tree, enum OlStrategy strategy, struct OlGold **out);

/**
 * # Safety
 * `gold` must be NULL or a handle not yet freed.
 */
void ol_gold_free(struct OlGold *gold);

/**
 * Initial configuration for `n` tokens with a cap of `nt_cap` consecutive
 * non-terminals.
 *
 * # Safety
 * `out` must be writable.
 */
enum OlStatus ol_config_new(size_t n,
                            enum OlStrategy strategy,
                            size_t nt_cap,
                            struct OlConfig **out);

/**
 * Applies a transition written as "SH", "RE", "FI" or "NT_X" in place.
 * An illegal transition leaves the configuration unchanged.
 *
 * # Safety
 * `config` must be a live handle; `transition` a NUL-terminated string.
 */
enum OlStatus ol_config_apply(struct OlConfig *config, const char *transition);

/**
 * 1 if the configuration is terminal, 0 otherwise (and for NULL).
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
int32_t ol_config_is_terminal(const struct OlConfig *config);

/**
 * Stack rendered as text.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable. Free the result
 * with [`ol_string_free`].
 */
enum OlStatus ol_config_summary(const struct OlConfig *config, char **out);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void ol_config_free(struct OlConfig *config);

/**
 * Minimum achievable loss from `config` against `gold`.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum OlStatus ol_loss(const struct OlConfig *config, const struct OlGold *gold, struct OlLoss *out);

/**
 * Space-separated optimal transitions over the gold tree's labels, in
 * tie-break order.
 *
 * # Safety
 * Both handles must be live; `out` must be writable. Free the result with
 * [`ol_string_free`].
 */
enum OlStatus ol_optimal_transitions(const struct OlConfig *config,
                                     const struct OlGold *gold,
                                     char **out);

/**
 * Checks the oracle against brute force on `walks` random walks over
 * `tree` (at most 6 tokens, cap 3). Writes the number of disagreeing
 * configurations to `mismatches` and returns `Mismatch` if it is nonzero.
 *
 * # Safety
 * `tree` must be a live handle; `mismatches` must be writable.
 */
enum OlStatus ol_check_tree(const struct OlTree *tree,
                            enum OlStrategy strategy,
                            size_t walks,
                            uint64_t seed,
                            size_t *mismatches);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORACLE_LAB_H */
