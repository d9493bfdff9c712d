/* C API smoke test, compiled as C to keep the header C-clean. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "svmsel.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const double kPi = 3.14159265358979323846;

int main(void) {
  svmsel_config* cfg = NULL;
  svmsel_report* rep = NULL;
  svmsel_kernel* k = NULL;
  size_t need = 0, rows = 0;
  char small[4];
  char* text;
  double v = 0.0, gram[9];
  const double xs[3] = {0.1, 0.4, 0.75};

  EXPECT(strlen(svmsel_version()) > 0);
  EXPECT(strcmp(svmsel_status_name(SVMSEL_ERR_CONFIG), svmsel_status_name(SVMSEL_OK)) != 0);

  EXPECT(svmsel_config_default(NULL) == SVMSEL_ERR_NULL);
  EXPECT(svmsel_config_default(&cfg) == SVMSEL_OK);
  EXPECT(svmsel_config_set(cfg, "delta", "7") == SVMSEL_ERR_CONFIG);
  EXPECT(strstr(svmsel_last_error(), "delta") != NULL);
  EXPECT(svmsel_config_set(cfg, "experiment", "gamma") == SVMSEL_OK);

  EXPECT(svmsel_config_to_json(cfg, NULL, 0, &need) == SVMSEL_OK);
  EXPECT(need > 10);
  EXPECT(svmsel_config_to_json(cfg, small, sizeof small, &need) == SVMSEL_ERR_BUFFER);
  text = (char*)malloc(need);
  EXPECT(svmsel_config_to_json(cfg, text, need, &need) == SVMSEL_OK);
  EXPECT(strlen(text) + 1 == need);
  EXPECT(strstr(text, "\"gamma\"") != NULL);
  free(text);

  EXPECT(svmsel_run(cfg, &rep) == SVMSEL_OK);
  EXPECT(svmsel_report_row_count(rep, &rows) == SVMSEL_OK);
  EXPECT(rows > 0);
  EXPECT(svmsel_report_rows_csv(rep, NULL, 0, &need) == SVMSEL_OK);
  text = (char*)malloc(need);
  EXPECT(svmsel_report_rows_csv(rep, text, need, &need) == SVMSEL_OK);
  EXPECT(strncmp(text, "kernel,n,", 9) == 0);
  free(text);
  svmsel_report_free(rep);
  svmsel_config_free(cfg);

  EXPECT(svmsel_config_from_json("{\"experiment\": \"nope\"}", &cfg) == SVMSEL_ERR_CONFIG);
  EXPECT(svmsel_config_from_file("/nonexistent/cfg.json", &cfg) == SVMSEL_ERR_IO);

  EXPECT(svmsel_kernel_from_json(
             "{\"family\": \"circle_fourier\", \"parameters\": {\"a0\": 1, \"amplitude\": 1, \"smoothness\": 1}}",
             &k) == SVMSEL_OK);
  /* 1 + sum cos(2 pi k z) / k^2 = 1 + pi^2 (z^2 - z + 1/6) */
  EXPECT(svmsel_kernel_eval(k, 0.1, 0.4, &v) == SVMSEL_OK);
  EXPECT(fabs(v - (1.0 + kPi * kPi * (0.09 - 0.3 + 1.0 / 6.0))) < 1e-9);
  EXPECT(svmsel_kernel_sup_bound(k, &v) == SVMSEL_OK);
  EXPECT(fabs(v * v - (1.0 + kPi * kPi / 6.0)) < 1e-9);
  EXPECT(svmsel_kernel_gram(k, xs, 3, gram) == SVMSEL_OK);
  EXPECT(gram[1] == gram[3]);
  EXPECT(svmsel_kernel_eval(k, 0.1, 0.4, &v) == SVMSEL_OK && fabs(gram[1] - v) < 1e-12);
  EXPECT(svmsel_kernel_eval(k, NAN, 0.4, &v) == SVMSEL_ERR_DOMAIN);
  EXPECT(svmsel_kernel_eval(NULL, 0.1, 0.4, &v) == SVMSEL_ERR_NULL);
  svmsel_kernel_free(k);

  if (failures) fprintf(stderr, "%d C API checks failed\n", failures);
  else printf("C API checks passed\n");
  return failures ? 1 : 0;
}
