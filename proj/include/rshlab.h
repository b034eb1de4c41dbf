/* C interface to the renormalized self-Hamiltonian laboratory.
 *
 * All functions returning int use the shared status codes:
 *   0  success
 *   1  configuration error (bad key, bad value, inconsistent settings)
 *   2  numeric or resource error (diagonalization, fitting, I/O)
 *   3  partial failure (a sweep finished but recorded failed points)
 *
 * On any nonzero status, rsh_last_error() returns a message describing the
 * failure; the pointer stays valid until the next call on the same thread.
 * Handles are opaque and must be released with the matching *_free call.
 */
#ifndef RSHLAB_H
#define RSHLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rsh_config rsh_config;
typedef struct rsh_report rsh_report;

/* ---- configuration ----------------------------------------------------- */

/* Defaults only; never fails. */
rsh_config* rsh_config_create(void);

/* Parse a flat key-value config file / text; NULL on failure. */
rsh_config* rsh_config_load(const char* path);
rsh_config* rsh_config_parse(const char* text);

/* Apply one key = value override (same keys as the file format). */
int rsh_config_set(rsh_config* cfg, const char* key, const char* value);

/* Consistency checks normally run at parse time; call after overrides. */
int rsh_config_validate(const rsh_config* cfg);

/* Canonical text form; release with rsh_string_free. NULL on failure. */
char* rsh_config_serialize(const rsh_config* cfg);

void rsh_config_free(rsh_config* cfg);

/* ---- experiment entry points ------------------------------------------- */

/* Each writes its files under the config's output directory and, when out
 * is non-NULL, hands back the report; *out is NULL when no report exists
 * (early config failures). A compare/diagnose failure after partial
 * progress still flushes report.json before returning nonzero. */
int rsh_run_compare(const rsh_config* cfg, rsh_report** out);
int rsh_run_sweep(const rsh_config* cfg, rsh_report** out);
int rsh_run_diagnose(const rsh_config* cfg, rsh_report** out);

/* Report payload as a JSON document (UTF-8, owned by the report). */
const char* rsh_report_json(const rsh_report* report);
void rsh_report_free(rsh_report* report);

/* ---- spectrum cache maintenance ----------------------------------------- */

int rsh_cache_stats(const char* dir, uint64_t* entries, uint64_t* bytes);
int rsh_cache_clear(const char* dir);

/* ---- misc ---------------------------------------------------------------- */

const char* rsh_last_error(void);
void rsh_string_free(char* text);
const char* rsh_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RSHLAB_H */
