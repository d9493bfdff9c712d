/* C interface to the svmsel library. All functions return an svmsel_status;
 * on failure svmsel_last_error() describes the problem (thread-local). */
#ifndef SVMSEL_H
#define SVMSEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SVMSEL_BUILDING)
#    define SVMSEL_API __declspec(dllexport)
#  else
#    define SVMSEL_API __declspec(dllimport)
#  endif
#else
#  define SVMSEL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svmsel_status {
  SVMSEL_OK = 0,
  SVMSEL_ERR_INVALID_ARGUMENT = 1,
  SVMSEL_ERR_DOMAIN = 2,
  SVMSEL_ERR_NOT_PSD = 3,
  SVMSEL_ERR_CONVERGENCE = 4,
  SVMSEL_ERR_CONFIG = 5,
  SVMSEL_ERR_IO = 6,
  SVMSEL_ERR_NULL = 7,
  SVMSEL_ERR_BUFFER = 8,
  SVMSEL_ERR_INTERNAL = 99
} svmsel_status;

typedef struct svmsel_config svmsel_config;
typedef struct svmsel_report svmsel_report;
typedef struct svmsel_kernel svmsel_kernel;

SVMSEL_API const char* svmsel_version(void);
SVMSEL_API const char* svmsel_status_name(int status);
/* Message of the last failure on this thread; "" after success. */
SVMSEL_API const char* svmsel_last_error(void);

/* Copy-out convention: *needed receives the size including the terminating NUL;
 * buf may be NULL when cap is 0. SVMSEL_ERR_BUFFER when cap is too small. */

/* ---- configs ---- */
SVMSEL_API int svmsel_config_default(svmsel_config** out);
SVMSEL_API int svmsel_config_from_json(const char* text, svmsel_config** out);
SVMSEL_API int svmsel_config_from_file(const char* path, svmsel_config** out);
/* Keys: experiment, seed, workers, phi, setting, c, delta, out, replicates. */
SVMSEL_API int svmsel_config_set(svmsel_config* cfg, const char* key, const char* value);
SVMSEL_API int svmsel_config_to_json(const svmsel_config* cfg, char* buf, size_t cap, size_t* needed);
SVMSEL_API int svmsel_config_output_dir(const svmsel_config* cfg, char* buf, size_t cap, size_t* needed);
SVMSEL_API void svmsel_config_free(svmsel_config* cfg);

/* Newline-separated experiment names. */
SVMSEL_API int svmsel_experiment_names(char* buf, size_t cap, size_t* needed);

/* ---- experiments ---- */
SVMSEL_API int svmsel_run(const svmsel_config* cfg, svmsel_report** out);
SVMSEL_API int svmsel_report_write(const svmsel_report* report, const char* dir);
SVMSEL_API int svmsel_report_rows_csv(const svmsel_report* report, char* buf, size_t cap, size_t* needed);
SVMSEL_API int svmsel_report_summary_json(const svmsel_report* report, char* buf, size_t cap, size_t* needed);
SVMSEL_API int svmsel_report_row_count(const svmsel_report* report, size_t* rows);
SVMSEL_API void svmsel_report_free(svmsel_report* report);

/* ---- kernels ---- */
/* Kernel from a JSON object with keys family, parameters, sup_bound, truncation, closed_form. */
SVMSEL_API int svmsel_kernel_from_json(const char* text, svmsel_kernel** out);
SVMSEL_API int svmsel_kernel_eval(const svmsel_kernel* k, double x, double y, double* value);
SVMSEL_API int svmsel_kernel_sup_bound(const svmsel_kernel* k, double* value);
/* out receives n*n row-major entries. */
SVMSEL_API int svmsel_kernel_gram(const svmsel_kernel* k, const double* xs, size_t n, double* out);
SVMSEL_API void svmsel_kernel_free(svmsel_kernel* k);

#ifdef __cplusplus
}
#endif

#endif /* SVMSEL_H */
