/* optosqueeze C API: drive squeezing simulations, pulse optimization and
 * parameter sweeps from a flat key=value config. All functions return an
 * osq_status; on failure osq_last_error() carries a message (thread-local,
 * valid until the next failing call on the same thread). Handles are opaque
 * and must be released with the matching _free call. */
#ifndef OPTOSQUEEZE_H
#define OPTOSQUEEZE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum osq_status {
  OSQ_OK = 0,
  OSQ_ERR_INVALID_ARGUMENT = 1,
  OSQ_ERR_CONFIG = 2,
  OSQ_ERR_NUMERIC = 3,
  OSQ_ERR_IO = 4,
  OSQ_ERR_UNSUPPORTED = 5,
  OSQ_ERR_INTERNAL = 6
} osq_status;

typedef struct osq_config osq_config;
typedef struct osq_result osq_result;

const char* osq_version(void);
const char* osq_last_error(void);

/* Config text: one "key = value" per line, '#' comments, dotted sections
 * (params.kappa_hz = 450e3 ...). Frequencies are plain Hz. */
osq_status osq_config_load(const char* path, osq_config** out);
osq_status osq_config_parse(const char* text, osq_config** out);
osq_status osq_config_set(osq_config* cfg, const char* key, const char* value);
/* Canonical 16-hex-char hash of the raw config; buf must hold >= 17 bytes. */
osq_status osq_config_hash(const osq_config* cfg, char* buf, size_t buflen);
void osq_config_free(osq_config* cfg);

/* command: simulate | optimize | compare | qsl-sweep | kappa-study */
osq_status osq_run(const osq_config* cfg, const char* command, osq_result** out);

int osq_result_count(const osq_result* result);
const char* osq_result_name(const osq_result* result, int index);
const char* osq_result_data(const osq_result* result, int index);
const char* osq_result_summary_json(const osq_result* result);
osq_status osq_result_write(const osq_result* result, const char* out_dir);
void osq_result_free(osq_result* result);

#ifdef __cplusplus
}
#endif

#endif /* OPTOSQUEEZE_H */
