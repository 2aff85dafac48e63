// Copyright 2026 The featforge Authors
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

/* C interface to the featforge library.
 *
 * Every fallible call returns an ff_status. On failure the message for the
 * calling thread is available from ff_last_error() until its next call into
 * the library. Strings returned through char** out-parameters are owned by
 * the caller and released with ff_string_free().
 */
#ifndef FEATFORGE_FEATFORGE_H_
#define FEATFORGE_FEATFORGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FEATFORGE_BUILDING_LIBRARY)
#    define FF_API __declspec(dllexport)
#  else
#    define FF_API __declspec(dllimport)
#  endif
#else
#  define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ff_status {
  FF_OK = 0,
  FF_E_MISSING_FILE = 1,
  FF_E_MALFORMED_ROW = 2,
  FF_E_SINGLE_CLASS_DATASET = 3,
  FF_E_NON_NUMERIC_SAMPLE = 4,
  FF_E_EMPTY_SIGNAL = 5,
  FF_E_WINDOW_TOO_LONG = 6,
  FF_E_SIGNAL_TOO_SHORT = 7,
  FF_E_UNKNOWN_WAVELET = 8,
  FF_E_LENGTH_MISMATCH = 9,
  FF_E_ZERO_ENERGY = 10,
  FF_E_ALL_CANDIDATES_FAILED = 11,
  FF_E_K_TOO_LARGE = 12,
  FF_E_METHOD_MISMATCH = 13,
  FF_E_SINGLE_CLASS = 14,
  FF_E_DEGENERATE_MATRIX = 15,
  FF_E_WIDTH_MISMATCH = 16,
  FF_E_PROTOCOL_COMPOSITION_IMPOSSIBLE = 17,
  FF_E_INVALID_ARGUMENT = 18,
  FF_E_INVALID_SPEC = 19,
  FF_E_EMPTY_REPORT = 20,
  FF_E_UNKNOWN_CONFIG_KEY = 21,
  FF_E_UNSUPPORTED_METHOD = 22,
  FF_E_IO = 23,
  FF_E_INTERNAL = 99
} ff_status;

typedef struct ff_config ff_config;
typedef struct ff_report ff_report;

FF_API const char* ff_version(void);
FF_API const char* ff_last_error(void);
FF_API const char* ff_status_name(ff_status status);
/* Nonzero for errors caused by user input rather than by the computation. */
FF_API int ff_status_is_validation(ff_status status);
FF_API void ff_string_free(char* s);

/* Configuration: key=value pairs with defaults for every known key. */
FF_API ff_config* ff_config_new(void);
FF_API void ff_config_free(ff_config* config);
FF_API ff_status ff_config_set(ff_config* config, const char* key, const char* value);
FF_API ff_status ff_config_get(const ff_config* config, const char* key, char** value);
FF_API ff_status ff_config_load_file(ff_config* config, const char* path);
FF_API ff_status ff_config_write(const ff_config* config, const char* path);

/* Writes a synthetic dataset (signal files and manifest.csv, or features.csv
 * for tabular recipes) into out_dir. */
FF_API ff_status ff_synth(const ff_config* config, const char* out_dir);

/* Extracts the layers named by the `layers` key into out_dir/features.csv
 * with a descriptor sidecar out_dir/features.json. */
FF_API ff_status ff_extract(const ff_config* config, const char* manifest_path,
                            const char* out_dir);

/* Runs the layered pipeline. On FF_OK *report is set; convergence is read
 * from the report, not from the status. */
FF_API ff_status ff_run(const ff_config* config, const char* manifest_path, ff_report** report);
FF_API ff_status ff_report_load(const char* json_path, ff_report** report);
FF_API void ff_report_free(ff_report* report);
FF_API int ff_report_converged(const ff_report* report);
FF_API int ff_report_halting_layer(const ff_report* report);
FF_API size_t ff_report_recommended_count(const ff_report* report);
FF_API ff_status ff_report_json(const ff_report* report, char** json);
FF_API ff_status ff_report_text(const ff_report* report, size_t top, char** text);
/* report.json, report.txt, model.txt (when a model was trained) and the
 * resolved configuration. */
FF_API ff_status ff_report_write(const ff_report* report, const char* out_dir);
/* One recommendation per line: name, then the lineage explanation. */
FF_API ff_status ff_recommend(const ff_report* report, size_t top, char** text);

/* PCA baseline for every method in `pca_method`; report_json_path may be
 * NULL. Writes comparison.txt and comparison.json into out_dir. */
FF_API ff_status ff_baseline(const ff_config* config, const char* manifest_path,
                             const char* report_json_path, const char* out_dir, char** table);

FF_API ff_status ff_budget(uint64_t n, double fs, size_t fft_size, char** text);

#ifdef __cplusplus
}
#endif

#endif /* FEATFORGE_FEATFORGE_H_ */
