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

#include "featforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>

#include <nlohmann/json.hpp>

#include "featforge/error.hpp"
#include "featforge/parallel.hpp"
#include "text_util.hpp"

namespace featforge {

using detail::format_double;

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& render, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += render(items[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  return join(v, [](double d) { return format_double(d); });
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be in [0, 1]");
  if (selection.k_schedule.empty()) throw Error(ErrorCode::kInvalidArgument, "empty k schedule");
  for (std::size_t i = 0; i < selection.k_schedule.size(); ++i) {
    if (selection.k_schedule[i] == 0 ||
        (i > 0 && selection.k_schedule[i] <= selection.k_schedule[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "k schedule must be positive and strictly increasing");
    }
  }
  if (selection.bin_count < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 bins");
  if (!is_power_of_two(fft_size)) throw Error(ErrorCode::kInvalidArgument, "fft_size must be a power of two");
  if (wavelets.empty()) throw Error(ErrorCode::kInvalidArgument, "no wavelet candidates");
  for (const auto& w : wavelets) wavelet_filter(w);
  if (grid.kinds.empty() || grid.c_values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty kernel grid");
  }
  make_kernel_grid(grid);
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  if (max_layer < 1 || max_layer > 3) throw Error(ErrorCode::kInvalidArgument, "max_layer must be 1, 2 or 3");
  if (hop > 0 && window_len > 0 && hop > window_len) {
    throw Error(ErrorCode::kInvalidArgument, "hop must not exceed window_len");
  }
  if (fs < 0.0 || !std::isfinite(fs)) throw Error(ErrorCode::kInvalidArgument, "fs must be positive");
}

LoadedDataset load_dataset(const DatasetManifest& manifest, double fs_override, unsigned jobs) {
  const double fs = fs_override > 0.0 ? fs_override : manifest.fs;
  if (!(fs > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sampling rate unknown: manifest has no fs directive and none was configured");
  }
  check_manifest_files(manifest);
  const std::size_t count = manifest.entries.size();
  std::vector<std::optional<Signal>> loaded(count);
  std::vector<std::string> errors(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    try {
      Signal s = load_signal(manifest.resolve(e), fs, e.label);
      s.source_id = e.path;
      loaded[i] = std::move(s);
    } catch (const Error& err) {
      errors[i] = err.what();
    }
  });
  LoadedDataset out;
  for (std::size_t i = 0; i < count; ++i) {
    if (loaded[i]) {
      out.signals.push_back(std::move(*loaded[i]));
    } else {
      out.warnings.push_back("dropped " + manifest.entries[i].path + ": " + errors[i]);
    }
  }
  if (out.signals.empty()) throw Error(ErrorCode::kEmptySignal, "no signal could be loaded");
  std::size_t shortest = out.signals.front().samples.size();
  std::size_t longest = shortest;
  for (const auto& s : out.signals) {
    shortest = std::min(shortest, s.samples.size());
    longest = std::max(longest, s.samples.size());
  }
  if (shortest != longest) {
    out.warnings.push_back("signal lengths range from " + std::to_string(shortest) + " to " +
                           std::to_string(longest) + "; all truncated to " +
                           std::to_string(shortest));
    for (auto& s : out.signals) s.samples.resize(shortest);
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> config_pairs(const PipelineConfig& c,
                                                              const WindowPlan& plan) {
  std::vector<std::pair<std::string, std::string>> out;
  auto sizes = [](const std::vector<std::size_t>& v) {
    return join(v, [](std::size_t x) { return std::to_string(x); });
  };
  out.emplace_back("bins", std::to_string(c.selection.bin_count));
  out.emplace_back("c_values", join_doubles(c.grid.c_values));
  out.emplace_back("coef0_values", join_doubles(c.grid.coef0_values));
  out.emplace_back("degree_values", join(c.grid.degree_values, [](int d) { return std::to_string(d); }));
  out.emplace_back("exhaustive_limit", std::to_string(c.exhaustive_limit));
  out.emplace_back("fft_size", std::to_string(c.fft_size));
  out.emplace_back("folds", std::to_string(c.folds));
  out.emplace_back("gamma_values", join_doubles(c.grid.gamma_values));
  out.emplace_back("hop", std::to_string(plan.hop));
  out.emplace_back("k_schedule", sizes(c.selection.k_schedule));
  out.emplace_back("kernels", join(c.grid.kinds, [](KernelKind k) { return std::string(to_string(k)); }));
  out.emplace_back("max_layer", std::to_string(c.max_layer));
  out.emplace_back("metric", std::string(to_string(c.metric)));
  out.emplace_back("mrms_beta", format_double(c.selection.mrms_beta));
  out.emplace_back("prescreen", std::to_string(c.selection.prescreen));
  out.emplace_back("protocol", c.protocol);
  out.emplace_back("seed", std::to_string(c.seed));
  out.emplace_back("svm_max_passes", std::to_string(c.solver.max_passes));
  out.emplace_back("svm_tolerance", format_double(c.solver.tolerance));
  out.emplace_back("tau", format_double(c.tau));
  out.emplace_back("wavelets", join(c.wavelets, [](const std::string& s) { return s; }));
  out.emplace_back("window_len", std::to_string(plan.window_len));
  return out;
}

std::vector<std::string> names_of(const FeatureMatrix& m, const std::vector<std::size_t>& cols) {
  std::vector<std::string> out;
  for (auto c : cols) out.push_back(m.descriptors[c].name);
  return out;
}

// Runs selection and evaluation over one cumulative candidate matrix.
LayerRecord evaluate_layer(int layer, const FeatureMatrix& candidates, const FoldAssignment& folds,
                           const PipelineConfig& config) {
  LayerRecord rec;
  rec.layer = layer;
  rec.candidate_features = candidates.cols();

  const auto grid = make_kernel_grid(config.grid);
  std::mutex cache_mutex;
  std::map<std::vector<std::size_t>, CvResult> cache;
  auto run_cv = [&](std::span<const std::size_t> cols, std::span<const KernelSpec> specs,
                    unsigned jobs) {
    CvOptions options;
    options.jobs = jobs;
    options.solver = config.solver;
    const FeatureMatrix sub = candidates.select_columns(cols);
    return evaluate_cv(sub, specs, folds, options);
  };
  Evaluator full_grid = [&](std::span<const std::size_t> cols) {
    CvResult cv = run_cv(cols, grid, config.jobs);
    EvaluationOutcome out{cv.metrics.value(config.metric), cv.best.describe()};
    std::lock_guard lock(cache_mutex);
    cache[std::vector<std::size_t>(cols.begin(), cols.end())] = std::move(cv);
    return out;
  };

  const IterativeResult it = iterative_k(candidates, full_grid, config.tau, config.selection);
  rec.screened_features = it.candidate_count;
  rec.k = it.k;
  rec.iterative_score = it.outcome.score;
  for (const auto& h : it.history) {
    rec.iterations.push_back({h.k, names_of(candidates, h.mrmr.selected),
                              names_of(candidates, h.mrms.selected),
                              names_of(candidates, h.z.selected), h.outcome.score});
  }
  std::vector<std::size_t> final_cols = it.z.selected;
  CvResult final_cv = cache.at(final_cols);
  double final_score = it.outcome.score;

  // Exhaustive pass over subsets of z, scored with the kernel that won for z.
  const KernelSpec best_kernel = final_cv.best;
  Evaluator single = [&](std::span<const std::size_t> cols) {
    CvResult cv = run_cv(cols, std::span<const KernelSpec>(&best_kernel, 1), 1);
    EvaluationOutcome out{cv.metrics.value(config.metric), cv.best.describe()};
    std::lock_guard lock(cache_mutex);
    cache[std::vector<std::size_t>(cols.begin(), cols.end())] = std::move(cv);
    return out;
  };
  if (auto ex = exhaustive_subsets(it.z.selected, single, config.exhaustive_limit, config.jobs)) {
    rec.exhaustive_ran = true;
    rec.exhaustive_evaluated = ex->evaluated;
    rec.exhaustive_score = ex->outcome.score;
    if (ex->outcome.score > final_score ||
        (ex->outcome.score == final_score && ex->best.size() < final_cols.size())) {
      final_cols = ex->best;
      final_score = ex->outcome.score;
      final_cv = cache.at(final_cols);
    }
  }
  rec.selected = final_cols;
  for (auto c : final_cols) rec.selected_descriptors.push_back(candidates.descriptors[c]);
  rec.kernel = final_cv.best;
  rec.metrics = final_cv.metrics;
  rec.score = final_score;
  rec.reached_tau = final_score >= config.tau;
  return rec;
}

}  // namespace

std::string choose_mother_wavelet(const std::vector<Signal>& signals,
                                  std::span<const std::size_t> rows,
                                  const std::vector<std::string>& candidates, unsigned jobs) {
  std::vector<std::string> votes(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const auto centered = mean_subtract(signals[rows[i]].samples);
    try {
      votes[i] = select_mother_wavelet(centered, candidates);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllCandidatesFailed) throw;
    }
  });
  std::vector<std::size_t> counts(candidates.size(), 0);
  for (const auto& v : votes) {
    auto it = std::find(candidates.begin(), candidates.end(), v);
    if (it != candidates.end()) ++counts[static_cast<std::size_t>(it - candidates.begin())];
  }
  const auto best = std::max_element(counts.begin(), counts.end());
  if (*best == 0) {
    throw Error(ErrorCode::kAllCandidatesFailed, "no wavelet candidate could score the training signals");
  }
  return candidates[static_cast<std::size_t>(best - counts.begin())];
}

PipelineReport run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config) {
  config.validate();
  LoadedDataset data = load_dataset(manifest, config.fs, config.jobs);
  std::string name = manifest.name.empty() ? manifest.base_dir.filename().string() : manifest.name;
  auto report = run_pipeline(std::move(data.signals), name, manifest.label_names, config);
  report.warnings.insert(report.warnings.begin(), data.warnings.begin(), data.warnings.end());
  return report;
}

PipelineReport run_pipeline(std::vector<Signal> signals, const std::string& dataset_name,
                            const std::vector<std::string>& class_names,
                            const PipelineConfig& config) {
  config.validate();
  if (signals.empty()) throw Error(ErrorCode::kEmptySignal, "no signals");
  std::set<int> distinct;
  for (const auto& s : signals) distinct.insert(s.label);
  if (distinct.size() < 2) throw Error(ErrorCode::kSingleClassDataset, "dataset has one class");

  PipelineReport report;
  report.dataset = dataset_name;
  report.instances = signals.size();
  report.class_names = class_names;
  report.fs = config.fs > 0.0 ? config.fs : signals.front().fs;
  report.signal_length = signals.front().samples.size();
  report.tau = config.tau;
  report.metric = config.metric;
  for (auto& s : signals) s.fs = report.fs;

  ExtractionParams params;
  params.plan = WindowPlan::for_rate(report.fs);
  if (config.window_len > 0) {
    params.plan.window_len = config.window_len;
    params.plan.hop = config.window_len / 2 > 0 ? config.window_len / 2 : 1;
  }
  if (config.hop > 0) params.plan.hop = config.hop;
  params.plan.validate();
  params.fft_size = config.fft_size;
  report.config = config_pairs(config, params.plan);

  std::vector<int> labels;
  for (const auto& s : signals) labels.push_back(s.label);
  const FoldAssignment folds = make_folds(labels, config.protocol, config.folds, config.seed);
  for (auto u : folds.unassigned) {
    report.warnings.push_back("instance " + signals[u].source_id + " not used by protocol " +
                              folds.protocol);
  }

  params.wavelet = choose_mother_wavelet(signals, folds.folds.front().train, config.wavelets, config.jobs);
  report.mother_wavelet = params.wavelet;

  FeatureMatrix candidates;
  FeatureMatrix layer2;
  for (int layer = 1; layer <= config.max_layer; ++layer) {
    const auto start = std::chrono::steady_clock::now();
    LayerRecord rec;
    try {
      if (layer == 1) {
        const int l[] = {1};
        candidates = extract_matrix(signals, params, l, config.jobs);
      } else if (layer == 2) {
        const int l[] = {2};
        layer2 = extract_matrix(signals, params, l, config.jobs);
        candidates = candidates.append_columns(layer2);
      } else {
        const int l[] = {3};
        candidates = candidates.append_columns(extract_matrix(signals, params, l, config.jobs));
      }
      rec = evaluate_layer(layer, candidates, folds, config);
    } catch (const Error& e) {
      if (layer == 1) throw;
      report.warnings.push_back("layer " + std::to_string(layer) + " failed: " + e.what());
      break;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool done = rec.reached_tau;
    report.layers.push_back(std::move(rec));
    if (done) break;
  }

  report.converged = !report.layers.empty() && report.layers.back().reached_tau;
  std::size_t pick = report.layers.size() - 1;
  if (!report.converged) {
    // Best-seen layer, earliest on ties.
    pick = 0;
    for (std::size_t i = 1; i < report.layers.size(); ++i) {
      if (report.layers[i].score > report.layers[pick].score) pick = i;
    }
  }
  const LayerRecord& chosen = report.layers[pick];
  report.halting_layer = chosen.layer;
  report.recommended = chosen.selected_descriptors;

  // The final model uses the chosen layer's columns; those all exist in the
  // cumulative matrix because later layers only append.
  FeatureMatrix final_matrix = candidates.select_columns(chosen.selected);
  report.final_model = train_svm(final_matrix, chosen.kernel, config.solver);
  return report;
}

std::vector<Recommendation> recommend(const PipelineReport& report, std::size_t top) {
  if (report.layers.empty() || report.recommended.empty()) {
    throw Error(ErrorCode::kEmptyReport, "report has no recommended features");
  }
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < report.recommended.size() && i < top; ++i) {
    out.push_back({report.recommended[i], report.recommended[i].explain()});
  }
  return out;
}

std::vector<ComparisonRow> compare_report(const PipelineReport* report,
                                          const std::vector<PcaBaselineResult>& pca,
                                          std::optional<double> soa_accuracy,
                                          std::optional<std::size_t> soa_features,
                                          const std::string& dataset) {
  auto base = [&] {
    ComparisonRow row;
    row.dataset = dataset.empty() && report ? report->dataset : dataset;
    row.soa_accuracy = soa_accuracy;
    row.soa_features = soa_features;
    if (report && !report->layers.empty()) {
      for (const auto& l : report->layers) {
        if (l.layer == report->halting_layer) {
          row.pipeline_accuracy = l.metrics.accuracy;
          row.pipeline_features = l.selected.size();
        }
      }
    }
    return row;
  };
  std::vector<ComparisonRow> rows;
  if (pca.empty()) rows.push_back(base());
  for (const auto& p : pca) {
    ComparisonRow row = base();
    row.reduction = std::string(to_string(p.method));
    row.components = p.components;
    row.pca_accuracy = p.cv.metrics.accuracy;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows) {
  const std::string dash = "—";
  auto pct = [&](const std::optional<double>& v) { return v ? fixed(100.0 * *v, 2) : dash; };
  auto count = [&](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : dash; };
  std::vector<std::vector<std::string>> cells = {{"Dataset", "SoA accuracy", "SoA features",
                                                  "Recommended accuracy", "Recommended features",
                                                  "Reduction", "Components", "PCA accuracy"}};
  for (const auto& r : rows) {
    cells.push_back({r.dataset.empty() ? dash : r.dataset,
                     r.soa_accuracy ? format_double(*r.soa_accuracy) : dash, count(r.soa_features),
                     pct(r.pipeline_accuracy), count(r.pipeline_features),
                     r.reduction.empty() ? dash : r.reduction, count(r.components),
                     pct(r.pca_accuracy)});
  }
  // Column widths in code points; the dash is one code point but three bytes.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out += std::string(widths[c] - width(row[c]) + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ojson = nlohmann::ordered_json;

ojson descriptor_json(const FeatureDescriptor& d) {
  return ojson{{"name", d.name},
               {"layer", d.layer},
               {"family", std::string(to_string(d.family))},
               {"lineage", d.lineage}};
}

FeatureDescriptor descriptor_from(const ojson& j) {
  FeatureDescriptor d;
  d.name = j.at("name").get<std::string>();
  d.layer = j.at("layer").get<int>();
  d.family = family_from_string(j.at("family").get<std::string>());
  d.lineage = j.at("lineage").get<std::vector<std::string>>();
  return d;
}

ojson metrics_json(const Metrics& m) {
  return ojson{{"accuracy", m.accuracy},       {"sensitivity", m.sensitivity},
               {"specificity", m.specificity}, {"f_score", m.f_score},
               {"classes", m.classes},         {"confusion", m.confusion}};
}

Metrics metrics_from(const ojson& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.sensitivity = j.at("sensitivity").get<double>();
  m.specificity = j.at("specificity").get<double>();
  m.f_score = j.at("f_score").get<double>();
  m.classes = j.at("classes").get<std::vector<int>>();
  m.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  return m;
}

ojson kernel_json(const KernelSpec& k) {
  return ojson{{"kind", std::string(to_string(k.kind))},
               {"C", k.C},
               {"gamma", k.gamma},
               {"coef0", k.coef0},
               {"degree", k.degree},
               {"description", k.describe()}};
}

KernelSpec kernel_from(const ojson& j) {
  KernelSpec k;
  k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  k.C = j.at("C").get<double>();
  k.gamma = j.at("gamma").get<double>();
  k.coef0 = j.at("coef0").get<double>();
  k.degree = j.at("degree").get<int>();
  return k;
}

template <typename T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> optional_from(const ojson& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string report_to_json(const PipelineReport& r) {
  ojson j;
  j["format"] = "featforge-report";
  j["version"] = 1;
  j["dataset"] = ojson{{"name", r.dataset},
                       {"instances", r.instances},
                       {"classes", r.class_names},
                       {"fs", r.fs},
                       {"signal_length", r.signal_length}};
  ojson config = ojson::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  j["config"] = config;
  j["tau"] = r.tau;
  j["metric"] = std::string(to_string(r.metric));
  j["mother_wavelet"] = r.mother_wavelet;
  ojson layers = ojson::array();
  for (const auto& l : r.layers) {
    ojson iterations = ojson::array();
    for (const auto& it : l.iterations) {
      iterations.push_back(ojson{{"k", it.k}, {"mrmr", it.mrmr}, {"mrms", it.mrms},
                                 {"z", it.z}, {"score", it.score}});
    }
    ojson selected = ojson::array();
    for (const auto& d : l.selected_descriptors) selected.push_back(d.name);
    layers.push_back(ojson{{"layer", l.layer},
                           {"candidate_features", l.candidate_features},
                           {"screened_features", l.screened_features},
                           {"iterations", iterations},
                           {"k", l.k},
                           {"iterative_score", l.iterative_score},
                           {"exhaustive", ojson{{"ran", l.exhaustive_ran},
                                                {"evaluated", l.exhaustive_evaluated},
                                                {"score", l.exhaustive_score}}},
                           {"selected", selected},
                           {"selected_columns", l.selected},
                           {"kernel", kernel_json(l.kernel)},
                           {"metrics", metrics_json(l.metrics)},
                           {"score", l.score},
                           {"reached_tau", l.reached_tau}});
  }
  j["layers"] = layers;
  j["halting_layer"] = r.halting_layer;
  j["converged"] = r.converged;
  ojson rec = ojson::array();
  for (const auto& d : r.recommended) {
    ojson entry = descriptor_json(d);
    entry["explanation"] = d.explain();
    rec.push_back(entry);
  }
  j["recommended"] = rec;
  ojson comparisons = ojson::array();
  for (const auto& c : r.comparisons) {
    comparisons.push_back(ojson{{"dataset", c.dataset},
                                {"soa_accuracy", optional_json(c.soa_accuracy)},
                                {"soa_features", optional_json(c.soa_features)},
                                {"pipeline_accuracy", optional_json(c.pipeline_accuracy)},
                                {"pipeline_features", optional_json(c.pipeline_features)},
                                {"reduction", c.reduction},
                                {"components", optional_json(c.components)},
                                {"pca_accuracy", optional_json(c.pca_accuracy)}});
  }
  j["comparisons"] = comparisons;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

PipelineReport report_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "featforge-report" || j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kMalformedRow, "not a featforge-report v1 document");
    }
    PipelineReport r;
    const auto& ds = j.at("dataset");
    r.dataset = ds.at("name").get<std::string>();
    r.instances = ds.at("instances").get<std::size_t>();
    r.class_names = ds.at("classes").get<std::vector<std::string>>();
    r.fs = ds.at("fs").get<double>();
    r.signal_length = ds.at("signal_length").get<std::size_t>();
    for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    r.tau = j.at("tau").get<double>();
    r.metric = metric_from_string(j.at("metric").get<std::string>());
    r.mother_wavelet = j.at("mother_wavelet").get<std::string>();
    r.halting_layer = j.at("halting_layer").get<int>();
    r.converged = j.at("converged").get<bool>();
    for (const auto& d : j.at("recommended")) r.recommended.push_back(descriptor_from(d));
    std::map<std::string, FeatureDescriptor> by_name;
    for (const auto& d : r.recommended) by_name[d.name] = d;
    for (const auto& lj : j.at("layers")) {
      LayerRecord l;
      l.layer = lj.at("layer").get<int>();
      l.candidate_features = lj.at("candidate_features").get<std::size_t>();
      l.screened_features = lj.at("screened_features").get<std::size_t>();
      for (const auto& it : lj.at("iterations")) {
        l.iterations.push_back({it.at("k").get<std::size_t>(),
                                it.at("mrmr").get<std::vector<std::string>>(),
                                it.at("mrms").get<std::vector<std::string>>(),
                                it.at("z").get<std::vector<std::string>>(),
                                it.at("score").get<double>()});
      }
      l.k = lj.at("k").get<std::size_t>();
      l.iterative_score = lj.at("iterative_score").get<double>();
      const auto& ex = lj.at("exhaustive");
      l.exhaustive_ran = ex.at("ran").get<bool>();
      l.exhaustive_evaluated = ex.at("evaluated").get<std::size_t>();
      l.exhaustive_score = ex.at("score").get<double>();
      l.selected = lj.at("selected_columns").get<std::vector<std::size_t>>();
      for (const auto& name : lj.at("selected").get<std::vector<std::string>>()) {
        auto it = by_name.find(name);
        if (it != by_name.end()) {
          l.selected_descriptors.push_back(it->second);
        } else {
          FeatureDescriptor d;
          d.name = name;
          l.selected_descriptors.push_back(d);
        }
      }
      l.kernel = kernel_from(lj.at("kernel"));
      l.metrics = metrics_from(lj.at("metrics"));
      l.score = lj.at("score").get<double>();
      l.reached_tau = lj.at("reached_tau").get<bool>();
      r.layers.push_back(std::move(l));
    }
    for (const auto& c : j.at("comparisons")) {
      ComparisonRow row;
      row.dataset = c.at("dataset").get<std::string>();
      row.soa_accuracy = optional_from<double>(c, "soa_accuracy");
      row.soa_features = optional_from<std::size_t>(c, "soa_features");
      row.pipeline_accuracy = optional_from<double>(c, "pipeline_accuracy");
      row.pipeline_features = optional_from<std::size_t>(c, "pipeline_features");
      row.reduction = c.at("reduction").get<std::string>();
      row.components = optional_from<std::size_t>(c, "components");
      row.pca_accuracy = optional_from<double>(c, "pca_accuracy");
      r.comparisons.push_back(std::move(row));
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, std::string("report is missing fields: ") + e.what());
  }
}

std::string report_to_text(const PipelineReport& r, std::size_t top) {
  std::string out;
  out += "featforge report: " + r.dataset + "\n";
  out += "instances " + std::to_string(r.instances) + ", classes " +
         join(r.class_names, [](const std::string& s) { return s; }) + ", fs " +
         format_double(r.fs) + " Hz, length " + std::to_string(r.signal_length) + "\n";
  out += "target " + std::string(to_string(r.metric)) + " >= " + format_double(r.tau) +
         ", mother wavelet " + r.mother_wavelet + "\n\n";
  for (const auto& l : r.layers) {
    out += "layer " + std::to_string(l.layer) + ": " + std::to_string(l.candidate_features) +
           " candidate features, " + std::to_string(l.screened_features) + " after pre-screen\n";
    for (const auto& it : l.iterations) {
      out += "  k=" + std::to_string(it.k) + "  |z|=" + std::to_string(it.z.size()) +
             "  score " + fixed(it.score) + "\n";
    }
    if (l.exhaustive_ran) {
      out += "  exhaustive: " + std::to_string(l.exhaustive_evaluated) + " subsets, best " +
             fixed(l.exhaustive_score) + "\n";
    }
    out += "  selected " + std::to_string(l.selected.size()) + " features, kernel " +
           l.kernel.describe() + "\n";
    out += "  accuracy " + fixed(l.metrics.accuracy) + "  sensitivity " +
           fixed(l.metrics.sensitivity) + "  specificity " + fixed(l.metrics.specificity) +
           "  f_score " + fixed(l.metrics.f_score) + "\n";
    out += "  score " + fixed(l.score) + (l.reached_tau ? " (reached target)" : " (below target)") +
           ", wall time " + fixed(l.wall_seconds, 2) + " s\n";
  }
  out += "\n";
  out += r.converged ? "converged at layer " + std::to_string(r.halting_layer) + "\n"
                     : "not converged; best layer " + std::to_string(r.halting_layer) + "\n";
  if (!r.recommended.empty()) {
    out += "\nrecommended features:\n";
    const auto recs = recommend(r, top);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      out += "  " + std::to_string(i + 1) + ". " + recs[i].explanation + "\n";
    }
  }
  if (!r.comparisons.empty()) out += "\ncomparison:\n" + render_comparison(r.comparisons);
  if (!r.warnings.empty()) {
    out += "\nwarnings:\n";
    for (const auto& w : r.warnings) out += "  " + w + "\n";
  }
  return out;
}

}  // namespace featforge
