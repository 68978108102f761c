/* mrf: model-based relational fuzzing of speculation contracts.
 *
 * C interface over the fuzzing core. Objects are opaque handles owned by the
 * caller and released with the matching *_free function. Every fallible call
 * returns an mrf_status; on failure mrf_last_error() describes the problem
 * (the message is thread-local and valid until the next call on the same
 * thread). Strings returned through char** are heap-allocated and must be
 * released with mrf_string_free. */

#ifndef MRF_MRF_H
#define MRF_MRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MRF_API __declspec(dllexport)
#else
#define MRF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrf_status {
  MRF_OK = 0,
  MRF_ERR_INVALID_ARGUMENT = 1,
  MRF_ERR_ASSEMBLY = 2,
  MRF_ERR_VALIDATION = 3,
  MRF_ERR_CONFIG = 4,
  MRF_ERR_EXECUTION = 5,
  MRF_ERR_FORMAT = 6,
  MRF_ERR_IO = 7,
  MRF_ERR_INTERNAL = 8
} mrf_status;

MRF_API const char* mrf_version(void);
MRF_API const char* mrf_status_string(mrf_status status);
MRF_API const char* mrf_last_error(void);
MRF_API void mrf_string_free(char* s);

/* ---- test cases ---- */

typedef struct mrf_testcase mrf_testcase;

typedef struct mrf_testcase_info {
  size_t blocks;
  size_t instructions;
  size_t payload;
  size_t memory_accesses;
  uint8_t sandbox_offset;
} mrf_testcase_info;

MRF_API mrf_status mrf_testcase_assemble(const char* text, mrf_testcase** out);
MRF_API mrf_status mrf_testcase_load(const char* path, mrf_testcase** out);
MRF_API mrf_status mrf_testcase_disassemble(const mrf_testcase* tc, char** out);
MRF_API mrf_status mrf_testcase_info_get(const mrf_testcase* tc, mrf_testcase_info* out);
/* Line and column of the most recent assembly error on this thread, 0 if
 * the last failure was not an assembly error. */
MRF_API void mrf_last_assembly_location(size_t* line, size_t* column);
MRF_API void mrf_testcase_free(mrf_testcase* tc);

/* ---- configuration ---- */

typedef struct mrf_config mrf_config;

MRF_API mrf_status mrf_config_default(mrf_config** out);
MRF_API mrf_status mrf_config_load(const char* path, mrf_config** out);
MRF_API mrf_status mrf_config_parse(const char* yaml, mrf_config** out);
/* key is dotted ("machine.reps") or an unambiguous bare name. */
MRF_API mrf_status mrf_config_set(mrf_config* cfg, const char* key, const char* value);
MRF_API mrf_status mrf_config_get(const mrf_config* cfg, const char* key, char** value);
/* "key = value" lines. */
MRF_API mrf_status mrf_config_dump(const mrf_config* cfg, char** out);
MRF_API mrf_status mrf_config_check(const mrf_config* cfg);
MRF_API void mrf_config_free(mrf_config* cfg);

/* ---- campaigns ---- */

typedef void (*mrf_log_fn)(const char* line, void* user);

typedef struct mrf_campaign_summary {
  uint64_t rounds_run;
  uint64_t violations;
  uint64_t errors;
  int stopped_on_violation;
  double mean_inputs;
  double mean_effective_classes;
} mrf_campaign_summary;

/* Runs a campaign; log (may be NULL) receives one line per round. */
MRF_API mrf_status mrf_fuzz(const mrf_config* cfg, mrf_log_fn log, void* user, mrf_campaign_summary* out);

/* Re-runs a bundle. overrides are "key=value" strings. *recurs is 1 when
 * the violation reproduces. message (may be NULL) receives a description. */
MRF_API mrf_status mrf_reproduce(const char* bundle_dir, const char* const* overrides, size_t n_overrides,
                                 int* recurs, char** message);

typedef struct mrf_minimize_summary {
  int reproducible;
  size_t original_inputs;
  size_t minimized_inputs;
  size_t original_payload;
  size_t minimized_payload;
  size_t fences_added;
  int stage_ok[3];
} mrf_minimize_summary;

MRF_API mrf_status mrf_minimize(const char* bundle_dir, mrf_minimize_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* MRF_MRF_H */
