// Copyright 2026 The rmtlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to rmtlab. All functions return an rmtlab_status; on failure
 * rmtlab_last_error() describes the problem for the calling thread. Strings
 * returned through out-parameters are owned by the handle they came from. */
#ifndef RMTLAB_RMTLAB_H_
#define RMTLAB_RMTLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(RMTLAB_BUILDING_LIBRARY)
#define RMTLAB_API __attribute__((visibility("default")))
#else
#define RMTLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rmtlab_status {
  RMTLAB_OK = 0,
  RMTLAB_INVALID_ARGUMENT = 1,
  RMTLAB_USAGE = 2,
  RMTLAB_IO = 3,
  RMTLAB_DEGENERATE_REALIZATION = 4,
  RMTLAB_SINGULAR_GRAM = 5,
  RMTLAB_UNDEFINED_BOUND = 6,
  RMTLAB_DEGENERATE_VARIANCE = 7,
  RMTLAB_INTERNAL = 8
} rmtlab_status;

RMTLAB_API const char* rmtlab_version(void);
RMTLAB_API const char* rmtlab_status_name(rmtlab_status status);
RMTLAB_API const char* rmtlab_last_error(void);

/* Experiments. */
typedef struct rmtlab_result rmtlab_result;

RMTLAB_API rmtlab_status rmtlab_run_json(const char* config_json, rmtlab_result** out);
RMTLAB_API void rmtlab_result_free(rmtlab_result* result);
RMTLAB_API rmtlab_status rmtlab_result_config_json(const rmtlab_result* result, const char** out);
RMTLAB_API rmtlab_status rmtlab_result_trial_count(const rmtlab_result* result, size_t* out);
/* Any of seed, value, standardized may be NULL. */
RMTLAB_API rmtlab_status rmtlab_result_trial(const rmtlab_result* result, size_t index, uint64_t* seed,
                                             double* value, double* standardized);
RMTLAB_API rmtlab_status rmtlab_result_summary_count(const rmtlab_result* result, size_t* out);
RMTLAB_API rmtlab_status rmtlab_result_summary_entry(const rmtlab_result* result, size_t index,
                                                     const char** name, double* value);
RMTLAB_API rmtlab_status rmtlab_result_summary_get(const rmtlab_result* result, const char* name,
                                                   double* value);
RMTLAB_API rmtlab_status rmtlab_result_wall_time(const rmtlab_result* result, double* seconds);
/* format is "csv" or "jsonl". */
RMTLAB_API rmtlab_status rmtlab_result_write(const rmtlab_result* result, const char* format, const char* stem);
/* checks like "ks<=0.06,mean_dev_se<3". report holds one line per check. */
RMTLAB_API rmtlab_status rmtlab_result_check(rmtlab_result* result, const char* checks, int* all_passed,
                                             const char** report);

/* Weingarten tables. pseudo != 0 allows m < k. */
typedef struct rmtlab_wg_table rmtlab_wg_table;

RMTLAB_API rmtlab_status rmtlab_wg_table_create(int k, int m, int pseudo, rmtlab_wg_table** out);
RMTLAB_API void rmtlab_wg_table_free(rmtlab_wg_table* table);
RMTLAB_API rmtlab_status rmtlab_wg_table_size(const rmtlab_wg_table* table, size_t* out);
RMTLAB_API rmtlab_status rmtlab_wg_table_matching(const rmtlab_wg_table* table, size_t index, const char** out);
RMTLAB_API rmtlab_status rmtlab_wg_table_value(const rmtlab_wg_table* table, size_t a, size_t b, double* out);
RMTLAB_API rmtlab_status rmtlab_wg_table_write_csv(const rmtlab_wg_table* table, const char* path);

/* Scalar helpers. */
RMTLAB_API rmtlab_status rmtlab_digamma(double x, double* out);
RMTLAB_API rmtlab_status rmtlab_trigamma(double x, double* out);
RMTLAB_API rmtlab_status rmtlab_beta_log_moments(int n, int l, double* mean, double* variance);
RMTLAB_API rmtlab_status rmtlab_theorem1_ks_bound(int n, int l, int factors, double c_const, double* out);
RMTLAB_API rmtlab_status rmtlab_skorski_tail_bound(double alpha, double beta, double eps, int upper, double* out);
RMTLAB_API rmtlab_status rmtlab_det_gram_moment_exact(int k, int n, int m, int p, double* out);
/* Integral of prod_t O[i_t, j_t] over Haar O(m); indices are 1-based. */
RMTLAB_API rmtlab_status rmtlab_orthogonal_moment(const int* i_indices, const int* j_indices, size_t order, int m,
                                                  double* out);
RMTLAB_API uint64_t rmtlab_derive_trial_seed(uint64_t master, uint64_t index);

#ifdef __cplusplus
}
#endif

#endif  /* RMTLAB_RMTLAB_H_ */
