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

#include "featforge/featforge.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "featforge/config.hpp"
#include "featforge/error.hpp"
#include "featforge/pipeline.hpp"
#include "featforge/synth.hpp"

struct ff_config {
  featforge::RunConfig config;
};

struct ff_report {
  featforge::PipelineReport report;
  featforge::RunConfig config;
};

namespace {

using featforge::Error;
using featforge::ErrorCode;

thread_local std::string g_last_error;

ff_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return FF_E_MISSING_FILE;
    case ErrorCode::kMalformedRow: return FF_E_MALFORMED_ROW;
    case ErrorCode::kSingleClassDataset: return FF_E_SINGLE_CLASS_DATASET;
    case ErrorCode::kNonNumericSample: return FF_E_NON_NUMERIC_SAMPLE;
    case ErrorCode::kEmptySignal: return FF_E_EMPTY_SIGNAL;
    case ErrorCode::kWindowTooLong: return FF_E_WINDOW_TOO_LONG;
    case ErrorCode::kSignalTooShort: return FF_E_SIGNAL_TOO_SHORT;
    case ErrorCode::kUnknownWavelet: return FF_E_UNKNOWN_WAVELET;
    case ErrorCode::kLengthMismatch: return FF_E_LENGTH_MISMATCH;
    case ErrorCode::kZeroEnergy: return FF_E_ZERO_ENERGY;
    case ErrorCode::kAllCandidatesFailed: return FF_E_ALL_CANDIDATES_FAILED;
    case ErrorCode::kKTooLarge: return FF_E_K_TOO_LARGE;
    case ErrorCode::kMethodMismatch: return FF_E_METHOD_MISMATCH;
    case ErrorCode::kSingleClass: return FF_E_SINGLE_CLASS;
    case ErrorCode::kDegenerateMatrix: return FF_E_DEGENERATE_MATRIX;
    case ErrorCode::kWidthMismatch: return FF_E_WIDTH_MISMATCH;
    case ErrorCode::kProtocolCompositionImpossible: return FF_E_PROTOCOL_COMPOSITION_IMPOSSIBLE;
    case ErrorCode::kInvalidArgument: return FF_E_INVALID_ARGUMENT;
    case ErrorCode::kInvalidSpec: return FF_E_INVALID_SPEC;
    case ErrorCode::kEmptyReport: return FF_E_EMPTY_REPORT;
    case ErrorCode::kUnknownConfigKey: return FF_E_UNKNOWN_CONFIG_KEY;
    case ErrorCode::kUnsupportedMethod: return FF_E_UNSUPPORTED_METHOD;
    case ErrorCode::kIo: return FF_E_IO;
  }
  return FF_E_INTERNAL;
}

template <typename F>
ff_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return FF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return FF_E_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

constexpr const char* kResolvedConfigName = "featforge.conf";

std::vector<int> layer_list(const featforge::RunConfig& config) {
  std::vector<int> layers;
  for (auto l : config.get_sizes("layers")) {
    if (l < 1 || l > 3) throw Error(ErrorCode::kInvalidArgument, "layers must be drawn from 1,2,3");
    layers.push_back(static_cast<int>(l));
  }
  return layers;
}

featforge::ExtractionParams extraction_params(const featforge::RunConfig& config, double fs) {
  featforge::ExtractionParams params;
  params.plan = featforge::WindowPlan::for_rate(fs);
  if (const auto w = config.get_size("window_len"); w > 0) {
    params.plan.window_len = w;
    params.plan.hop = w / 2 > 0 ? w / 2 : 1;
  }
  if (const auto h = config.get_size("hop"); h > 0) params.plan.hop = h;
  params.plan.validate();
  params.fft_size = config.get_size("fft_size");
  return params;
}

}  // namespace

extern "C" {

FF_API const char* ff_version(void) { return "0.1.0"; }

FF_API const char* ff_last_error(void) { return g_last_error.c_str(); }

FF_API const char* ff_status_name(ff_status status) {
  if (status == FF_OK) return "ok";
  if (status == FF_E_INTERNAL) return "internal";
  if (status >= FF_E_MISSING_FILE && status <= FF_E_IO) {
    static const std::vector<std::string> names = [] {
      std::vector<std::string> out;
      for (int c = 0; c <= static_cast<int>(ErrorCode::kIo); ++c) {
        out.emplace_back(featforge::to_string(static_cast<ErrorCode>(c)));
      }
      return out;
    }();
    return names[static_cast<std::size_t>(status) - 1].c_str();
  }
  return "unknown";
}

FF_API int ff_status_is_validation(ff_status status) {
  if (status >= FF_E_MISSING_FILE && status <= FF_E_IO) {
    return featforge::is_validation_error(static_cast<ErrorCode>(status - 1)) ? 1 : 0;
  }
  return 0;
}

FF_API void ff_string_free(char* s) { std::free(s); }

FF_API ff_config* ff_config_new(void) {
  try {
    return new ff_config();
  } catch (...) {
    g_last_error = "out of memory";
    return nullptr;
  }
}

FF_API void ff_config_free(ff_config* config) { delete config; }

FF_API ff_status ff_config_set(ff_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->config.set(key, value);
  });
}

FF_API ff_status ff_config_get(const ff_config* config, const char* key, char** value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    *value = dup_string(config->config.get(key));
  });
}

FF_API ff_status ff_config_load_file(ff_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->config.load_file(path);
  });
}

FF_API ff_status ff_config_write(const ff_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->config.write(path);
  });
}

FF_API ff_status ff_synth(const ff_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    const auto& cfg = config->config;
    const featforge::SynthSpec spec = cfg.synth_spec();
    const std::filesystem::path dir(out_dir);
    make_dir(dir);
    if (featforge::is_tabular_recipe(spec.recipe)) {
      const auto resolved = spec.resolved();
      const auto m = featforge::generate_xor_features(resolved.instances, resolved.seed);
      featforge::write_feature_csv(m, dir / "features.csv");
      featforge::write_descriptor_sidecar(m, dir / "features.json");
    } else {
      featforge::generate(spec, dir, cfg.jobs());
    }
    cfg.write(dir / kResolvedConfigName);
  });
}

FF_API ff_status ff_extract(const ff_config* config, const char* manifest_path,
                            const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    const auto& cfg = config->config;
    const auto layers = layer_list(cfg);
    const auto manifest = featforge::load_manifest(manifest_path);
    auto data = featforge::load_dataset(manifest, cfg.get_double("fs"), cfg.jobs());
    const double fs = data.signals.front().fs;
    auto params = extraction_params(cfg, fs);
    std::vector<std::size_t> all(data.signals.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    params.wavelet = featforge::choose_mother_wavelet(data.signals, all, cfg.get_list("wavelets"),
                                                      cfg.jobs());
    const auto m = featforge::extract_matrix(data.signals, params, layers, cfg.jobs());
    const std::filesystem::path dir(out_dir);
    make_dir(dir);
    featforge::write_feature_csv(m, dir / "features.csv");
    featforge::write_descriptor_sidecar(m, dir / "features.json");
    cfg.write(dir / kResolvedConfigName);
  });
}

FF_API ff_status ff_run(const ff_config* config, const char* manifest_path, ff_report** report) {
  return guarded([&] {
    require(config, "config");
    require(manifest_path, "manifest_path");
    require(report, "report");
    *report = nullptr;
    const auto pc = config->config.pipeline_config();
    const auto manifest = featforge::load_manifest(manifest_path);
    auto out = std::make_unique<ff_report>();
    out->report = featforge::run_pipeline(manifest, pc);
    out->config = config->config;
    *report = out.release();
  });
}

FF_API ff_status ff_report_load(const char* json_path, ff_report** report) {
  return guarded([&] {
    require(json_path, "json_path");
    require(report, "report");
    *report = nullptr;
    auto out = std::make_unique<ff_report>();
    out->report = featforge::report_from_json(read_text(json_path));
    *report = out.release();
  });
}

FF_API void ff_report_free(ff_report* report) { delete report; }

FF_API int ff_report_converged(const ff_report* report) {
  return report && report->report.converged ? 1 : 0;
}

FF_API int ff_report_halting_layer(const ff_report* report) {
  return report ? report->report.halting_layer : 0;
}

FF_API size_t ff_report_recommended_count(const ff_report* report) {
  return report ? report->report.recommended.size() : 0;
}

FF_API ff_status ff_report_json(const ff_report* report, char** json) {
  return guarded([&] {
    require(report, "report");
    require(json, "json");
    *json = dup_string(featforge::report_to_json(report->report));
  });
}

FF_API ff_status ff_report_text(const ff_report* report, size_t top, char** text) {
  return guarded([&] {
    require(report, "report");
    require(text, "text");
    *text = dup_string(featforge::report_to_text(report->report, top));
  });
}

FF_API ff_status ff_report_write(const ff_report* report, const char* out_dir) {
  return guarded([&] {
    require(report, "report");
    require(out_dir, "out_dir");
    const std::filesystem::path dir(out_dir);
    make_dir(dir);
    write_text(dir / "report.json", featforge::report_to_json(report->report));
    write_text(dir / "report.txt",
               featforge::report_to_text(report->report, report->config.get_size("top")));
    if (report->report.final_model) {
      featforge::save_model(*report->report.final_model, dir / "model.txt");
    }
    report->config.write(dir / kResolvedConfigName);
  });
}

FF_API ff_status ff_recommend(const ff_report* report, size_t top, char** text) {
  return guarded([&] {
    require(report, "report");
    require(text, "text");
    std::string out;
    for (const auto& r : featforge::recommend(report->report, top)) {
      out += r.descriptor.name + "\t" + r.explanation + "\n";
    }
    *text = dup_string(out);
  });
}

FF_API ff_status ff_baseline(const ff_config* config, const char* manifest_path,
                             const char* report_json_path, const char* out_dir, char** table) {
  return guarded([&] {
    require(config, "config");
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    const auto& cfg = config->config;
    std::vector<featforge::PcaMethod> methods;
    for (const auto& m : cfg.get_list("pca_method")) {
      methods.push_back(featforge::pca_method_from_string(m));
    }
    const auto pc = cfg.pipeline_config();
    std::optional<featforge::PipelineReport> report;
    if (report_json_path) report = featforge::report_from_json(read_text(report_json_path));

    const auto layers = layer_list(cfg);
    const auto manifest = featforge::load_manifest(manifest_path);
    auto data = featforge::load_dataset(manifest, pc.fs, pc.jobs);
    auto params = extraction_params(cfg, data.signals.front().fs);
    std::vector<int> labels;
    for (const auto& s : data.signals) labels.push_back(s.label);
    const auto folds = featforge::make_folds(labels, pc.protocol, pc.folds, pc.seed);
    params.wavelet = featforge::choose_mother_wavelet(data.signals, folds.folds.front().train,
                                                      pc.wavelets, pc.jobs);
    const auto matrix = featforge::extract_matrix(data.signals, params, layers, pc.jobs);
    const auto grid = featforge::rbf_grid(pc.grid);
    std::vector<featforge::PcaBaselineResult> results;
    for (auto method : methods) {
      results.push_back(featforge::pca_pipeline(matrix, cfg.get_size("components"), method, folds,
                                                grid, pc.jobs));
    }
    std::optional<double> soa_acc;
    std::optional<std::size_t> soa_feat;
    if (const auto& s = cfg.get("soa_accuracy"); !s.empty()) soa_acc = cfg.get_double("soa_accuracy");
    if (const auto& s = cfg.get("soa_features"); !s.empty()) soa_feat = cfg.get_size("soa_features");
    const std::string name = manifest.name.empty() ? std::string("dataset") : manifest.name;
    const auto rows = featforge::compare_report(report ? &*report : nullptr, results, soa_acc,
                                                soa_feat, name);
    const std::string text = featforge::render_comparison(rows);

    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      auto opt = [](const auto& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
      };
      j.push_back({{"dataset", r.dataset},
                   {"soa_accuracy", opt(r.soa_accuracy)},
                   {"soa_features", opt(r.soa_features)},
                   {"pipeline_accuracy", opt(r.pipeline_accuracy)},
                   {"pipeline_features", opt(r.pipeline_features)},
                   {"reduction", r.reduction},
                   {"components", opt(r.components)},
                   {"pca_accuracy", opt(r.pca_accuracy)},
                   {"kernel", results[i].cv.best.describe()}});
    }
    const std::filesystem::path dir(out_dir);
    make_dir(dir);
    write_text(dir / "comparison.txt", text);
    write_text(dir / "comparison.json", j.dump(2) + "\n");
    cfg.write(dir / kResolvedConfigName);
    if (table) *table = dup_string(text);
  });
}

FF_API ff_status ff_budget(uint64_t n, double fs, size_t fft_size, char** text) {
  return guarded([&] {
    require(text, "text");
    if (n == 0) {
      throw featforge::Error(featforge::ErrorCode::kInvalidArgument, "signal length n must be positive");
    }
    *text = dup_string(featforge::feature_budget(n, fs, fft_size).describe());
  });
}

}  // extern "C"
