/* C interface to the matchsim toolkit: configuration loading, experiment
 * dispatch, and direct market simulation behind opaque handles.
 *
 * All functions returning int use the status codes below. On failure the
 * thread-local message from ms_last_error() describes the problem. Strings
 * returned through char** outputs are owned by the caller and must be
 * released with ms_string_free().
 */
#ifndef MATCHSIM_H
#define MATCHSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MS_OK 0
#define MS_ERR 1
#define MS_ERR_CONFIG 2
#define MS_ERR_AUDIT 3
#define MS_ERR_IO 4

typedef struct ms_config ms_config;
typedef struct ms_market ms_market;
typedef struct ms_matching ms_matching;

const char* ms_version(void);
const char* ms_last_error(void);
void ms_string_free(char* s);

/* Configuration ----------------------------------------------------------- */

ms_config* ms_config_load(const char* path);
ms_config* ms_config_parse(const char* json_text);
ms_config* ms_config_default(void);
void ms_config_free(ms_config* config);

/* Canonical (sorted-key, defaults materialized) form of the config. */
char* ms_config_canonical(const ms_config* config);
uint64_t ms_config_hash(const ms_config* config);

/* Overrides; key is one of "seed", "replications", "threads". */
int ms_config_set_u64(ms_config* config, const char* key, uint64_t value);
/* key is one of "out_dir", "format" (csv|jsonl|both). */
int ms_config_set_string(ms_config* config, const char* key, const char* value);

/* Experiments ------------------------------------------------------------- */

/* kind: simulate | concentration | audit-bdc | audit-equilibration |
 * rankdiff | estimators | example-fixtures. Writes CSV/JSONL/manifest under
 * the configured output directory. Returns MS_OK, MS_ERR_CONFIG,
 * MS_ERR_AUDIT or MS_ERR_IO, mirroring the CLI exit codes. When
 * manifest_json_out is non-null it receives the run manifest. */
int ms_run(const ms_config* config, const char* kind, char** manifest_json_out);

/* Golden replay of the worked five-student market; table_out receives a
 * comparison table. MS_ERR_AUDIT if any matching deviates. */
int ms_example_fixtures(char** table_out);

/* Markets ----------------------------------------------------------------- */

/* Samples a market from the config's model section and derives the
 * preference profile. */
ms_market* ms_market_sample(const ms_config* config);
void ms_market_free(ms_market* market);
int ms_market_num_students(const ms_market* market);
int ms_market_num_colleges(const ms_market* market);

/* Student-optimal / college-optimal stable matchings. */
ms_matching* ms_market_sosm(const ms_market* market);
ms_matching* ms_market_college_optimal(const ms_market* market);
void ms_matching_free(ms_matching* matching);

/* Copies the assignment vector (0 = unmatched, 1..m college ids) into out;
 * returns the number of students, or -1 if cap is too small. */
int ms_matching_assignment(const ms_matching* matching, int32_t* out, size_t cap);

/* 1 if stable, 0 if not, -1 on error. */
int ms_matching_is_stable(const ms_market* market, const ms_matching* matching);

/* Fraction of students matched to college j (j = 0 counts the unmatched). */
double ms_matching_frequency(const ms_matching* matching, int college);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MATCHSIM_H */
