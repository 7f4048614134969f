/* C interface of the dolb lattice Boltzmann solver.
 *
 * All functions return DOLB_OK (0) on success; on failure they return a
 * nonzero status code and dolb_last_error() describes the problem. Handles
 * are opaque and must be released with their matching free function. The
 * last-error buffer is thread local.
 */
#ifndef DOLB_H
#define DOLB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DOLB_API __declspec(dllexport)
#else
#define DOLB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dolb_status {
    DOLB_OK = 0,
    DOLB_ERROR_INVALID_ARGUMENT = 1,
    DOLB_ERROR_CONFIG = 2,
    DOLB_ERROR_IO = 3,
    DOLB_ERROR_DISPATCH = 4,
    DOLB_ERROR_EXCHANGE = 5,
    DOLB_ERROR_INTERNAL = 6,
} dolb_status;

typedef struct dolb_config dolb_config;

DOLB_API const char* dolb_version(void);
DOLB_API const char* dolb_last_error(void);

/* Configuration: flat "section.key" string pairs, optionally loaded from a
 * config file first and overridden by subsequent sets. */
DOLB_API dolb_config* dolb_config_new(void);
DOLB_API void dolb_config_free(dolb_config* config);
DOLB_API dolb_status dolb_config_load(dolb_config* config, const char* path);
DOLB_API dolb_status dolb_config_set(dolb_config* config, const char* key, const char* value);
DOLB_API dolb_status dolb_config_get(const dolb_config* config, const char* key, char* buffer,
                                     size_t capacity);

/* Runs the configured benchmark; artifacts (series.csv, perf.csv, manifest,
 * optional field dumps) are written to the configured output directory.
 * steps_out and mlups_out are optional. */
DOLB_API dolb_status dolb_run(const dolb_config* config, int64_t* steps_out, double* mlups_out);

/* Newline-separated list of the chain strings the configured case needs;
 * running with this dispatch list cannot raise a missing-model error.
 * length_out receives the required buffer size including the terminator;
 * buffer may be NULL to query the size. */
DOLB_API dolb_status dolb_show_models(const dolb_config* config, char* buffer, size_t capacity,
                                      size_t* length_out);

/* Analytical performance model. precision_bits is 32 or 64. */
DOLB_API dolb_status dolb_bytes_per_cell(int precision_bits, int64_t* bytes_out);
DOLB_API dolb_status dolb_peak_glups(const char* device_name, const char* catalog_path_or_null,
                                     int precision_bits, double* glups_out);
DOLB_API dolb_status dolb_memory_fraction(const char* device_name,
                                          const char* catalog_path_or_null, int precision_bits,
                                          int64_t L, double* fraction_out);

#ifdef __cplusplus
}
#endif

#endif /* DOLB_H */
