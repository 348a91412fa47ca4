#ifndef FUNPOISON_H
#define FUNPOISON_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible operations.
 */
typedef enum FpStatus {
  FP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FP_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FP_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid configuration value (rate, mode, ...).
   */
  FP_STATUS_CONFIG = 3,
  /**
   * File could not be read or written.
   */
  FP_STATUS_IO = 4,
  /**
   * Clean/poisoned corpora are not unit-aligned.
   */
  FP_STATUS_ID_MISMATCH = 5,
  /**
   * Any other pipeline failure.
   */
  FP_STATUS_INTERNAL = 6,
} FpStatus;

typedef struct FpCorpus FpCorpus;

typedef struct FpPool FpPool;

/**
 * A completed injection: poisoned corpus plus its report.
 */
typedef struct FpRun FpRun;

typedef struct FpSummary FpSummary;

typedef struct FpToolchain FpToolchain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty string when
 * nothing failed yet. The pointer is invalidated by the next failure.
 */
const char *fp_last_error_message(void);

/**
 * Frees a string returned by an `fp_*_render` function.
 */
void fp_string_free(char *ptr);

/**
 * Resolve a compiler backend: "auto", "embedded", or a javac path.
 * `timeout_secs` bounds each compile/run probe. Null on failure.
 */
struct FpToolchain *fp_toolchain_new(const char *spec, uint64_t timeout_secs);

/**
 * Load a corpus from a directory of .java files or a JSONL record file.
 */
struct FpCorpus *fp_corpus_load(const char *path);

uintptr_t fp_corpus_len(const struct FpCorpus *corpus);

/**
 * Mine, repair, and safety-filter a template pool. `cap` 0 means
 * uncapped. Null on failure.
 */
struct FpPool *fp_pool_build(const struct FpCorpus *corpus,
                             uintptr_t cap,
                             uint64_t seed,
                             const struct FpToolchain *toolchain);

struct FpPool *fp_pool_load(const char *path);

enum FpStatus fp_pool_save(const struct FpPool *pool, const char *path);

uintptr_t fp_pool_len(const struct FpPool *pool);

/**
 * Poison a corpus. `mode` is "funpoison" or "dead-branch". Null on
 * failure (including invalid configuration).
 */
struct FpRun *fp_inject(const struct FpCorpus *corpus,
                        const struct FpPool *pool,
                        double rate,
                        uintptr_t templates_per_unit,
                        uint64_t seed,
                        const char *mode,
                        const struct FpToolchain *toolchain);

double fp_run_effective_rate(const struct FpRun *run);

uintptr_t fp_run_reverted_units(const struct FpRun *run);

/**
 * Write the poisoned corpus and its JSONL report to the given paths.
 */
enum FpStatus fp_run_save(const struct FpRun *run,
                          const char *corpus_path,
                          const char *report_path);

/**
 * Verify a run against its clean corpus. Null on failure (including
 * id misalignment).
 */
struct FpSummary *fp_verify(const struct FpCorpus *clean,
                            const struct FpRun *run,
                            const struct FpToolchain *toolchain);

/**
 * 1 when every hard invariant held, 0 otherwise (or on null).
 */
int32_t fp_summary_healthy(const struct FpSummary *summary);

double fp_summary_compile_fraction(const struct FpSummary *summary);

/**
 * Structured record plus human-readable table; free with
 * `fp_string_free`. Null on null input.
 */
char *fp_summary_render(const struct FpSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUNPOISON_H */
