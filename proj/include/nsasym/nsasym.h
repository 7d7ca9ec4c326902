#ifndef NSASYM_H
#define NSASYM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(NSASYM_BUILDING_LIBRARY)
#define NSASYM_API __attribute__((visibility("default")))
#else
#define NSASYM_API
#endif

typedef enum nsasym_status {
  NSASYM_OK = 0,
  NSASYM_ERR_INVALID_ARGUMENT = 1,
  NSASYM_ERR_CONFIG = 2,
  NSASYM_ERR_IO = 3,
  NSASYM_ERR_ILL_POSED = 4,
  NSASYM_ERR_CONVERGENCE = 5,
  NSASYM_ERR_BLOWUP = 6,
  NSASYM_ERR_INTERNAL = 7
} nsasym_status;

typedef struct nsasym_config nsasym_config;
typedef struct nsasym_result nsasym_result;

typedef void (*nsasym_log_fn)(const char* message, void* user);

/* One verdict row; the strings live as long as the result handle. */
typedef struct nsasym_verdict_row {
  const char* claim;
  const char* paper_ref;
  double measured;
  const char* expected;
  double tol;
  int pass;
} nsasym_verdict_row;

typedef struct nsasym_decay_fit {
  double mu;
  double a;
  double b;
  double mu_power;
  double mu_log;
  double b_log;
  double residual_power;
  double residual_log;
  double t_min;
  double t_max;
  size_t points;
  int log_detected;
} nsasym_decay_fit;

NSASYM_API const char* nsasym_version(void);
NSASYM_API const char* nsasym_status_name(nsasym_status status);

/* Message of the last failed call on this thread ("" after success). */
NSASYM_API const char* nsasym_last_error(void);
/* Config line of the last NSASYM_ERR_CONFIG, 0 when not tied to a line. */
NSASYM_API int nsasym_last_error_line(void);

NSASYM_API nsasym_status nsasym_config_default(nsasym_config** out);
NSASYM_API nsasym_status nsasym_config_load(const char* path, nsasym_config** out);
NSASYM_API nsasym_status nsasym_config_parse(const char* text, nsasym_config** out);
/* "section.key=value" */
NSASYM_API nsasym_status nsasym_config_override(nsasym_config* config, const char* assignment);
NSASYM_API nsasym_status nsasym_config_validate(const nsasym_config* config);
/* Canonical text into buf (NUL-terminated when it fits); *needed gets the
   size including the terminator. */
NSASYM_API nsasym_status nsasym_config_to_ini(const nsasym_config* config, char* buf, size_t capacity,
                                              size_t* needed);
NSASYM_API void nsasym_config_free(nsasym_config* config);

NSASYM_API size_t nsasym_command_count(void);
NSASYM_API const char* nsasym_command_name(size_t index);

/* Runs a command; input may be NULL for the default location inside
   out_dir, log may be NULL. On NSASYM_OK *out holds the verdict. */
NSASYM_API nsasym_status nsasym_run(const nsasym_config* config, const char* command, const char* out_dir,
                                    const char* input, nsasym_log_fn log, void* user, nsasym_result** out);
NSASYM_API int nsasym_result_pass(const nsasym_result* result);
NSASYM_API size_t nsasym_result_row_count(const nsasym_result* result);
NSASYM_API nsasym_status nsasym_result_row(const nsasym_result* result, size_t index, nsasym_verdict_row* out);
NSASYM_API size_t nsasym_result_file_count(const nsasym_result* result);
NSASYM_API const char* nsasym_result_file(const nsasym_result* result, size_t index);
NSASYM_API void nsasym_result_free(nsasym_result* result);

/* Power-law fit with log detection of v(t) over [t_min, t_max]. */
NSASYM_API nsasym_status nsasym_fit_decay(const double* t, const double* v, size_t n, double t_min, double t_max,
                                          nsasym_decay_fit* out);

#ifdef __cplusplus
}
#endif

#endif
