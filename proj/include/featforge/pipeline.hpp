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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featforge/baseline_pca.hpp"
#include "featforge/classifier.hpp"
#include "featforge/feature_bank.hpp"
#include "featforge/selection.hpp"
#include "featforge/signal_io.hpp"

namespace featforge {

struct PipelineConfig {
  double tau = 0.95;
  MetricKind metric = MetricKind::kAccuracy;
  SelectionOptions selection;
  std::size_t window_len = 0;  // 0: one second at the dataset rate
  std::size_t hop = 0;         // 0: half the window
  std::size_t fft_size = 256;
  std::vector<std::string> wavelets = wavelet_candidates();
  KernelGridValues grid;
  SolverOptions solver;
  std::string protocol = "stratified-k";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t exhaustive_limit = kExhaustiveLimit;
  int max_layer = 3;
  double fs = 0.0;  // overrides the manifest rate when positive

  void validate() const;
};

struct IterationSummary {
  std::size_t k = 0;
  std::vector<std::string> mrmr;
  std::vector<std::string> mrms;
  std::vector<std::string> z;
  double score = 0.0;
};

struct LayerRecord {
  int layer = 1;
  std::size_t candidate_features = 0;  // columns of FL1 u ... u FLlayer
  std::size_t screened_features = 0;   // after the pre-screen
  std::vector<IterationSummary> iterations;
  std::size_t k = 0;
  double iterative_score = 0.0;
  bool exhaustive_ran = false;
  std::size_t exhaustive_evaluated = 0;
  double exhaustive_score = 0.0;
  /// Final feature set of this layer, greedy order.
  std::vector<std::size_t> selected;
  std::vector<FeatureDescriptor> selected_descriptors;
  KernelSpec kernel;
  Metrics metrics;
  double score = 0.0;
  bool reached_tau = false;
  double wall_seconds = 0.0;  // text report only
};

struct ComparisonRow {
  std::string dataset;
  std::optional<double> soa_accuracy;  // percent, as published
  std::optional<std::size_t> soa_features;
  std::optional<double> pipeline_accuracy;  // fraction
  std::optional<std::size_t> pipeline_features;
  std::string reduction;  // "svd", "eig", or empty
  std::optional<std::size_t> components;
  std::optional<double> pca_accuracy;  // fraction
};

struct Recommendation {
  FeatureDescriptor descriptor;
  std::string explanation;
};

struct PipelineReport {
  std::string dataset;
  std::size_t instances = 0;
  std::vector<std::string> class_names;
  double fs = 0.0;
  std::size_t signal_length = 0;
  std::string mother_wavelet;
  double tau = 0.0;
  MetricKind metric = MetricKind::kAccuracy;
  std::vector<std::pair<std::string, std::string>> config;  // result-affecting keys
  std::vector<LayerRecord> layers;
  int halting_layer = 0;
  bool converged = false;
  std::vector<FeatureDescriptor> recommended;
  std::vector<ComparisonRow> comparisons;
  std::vector<std::string> warnings;
  std::optional<TrainedModel> final_model;  // fit on all rows, halting layer's features
};

/// Signals loaded for a run: failures become warnings and unequal lengths are
/// truncated to the shortest.
struct LoadedDataset {
  std::vector<Signal> signals;
  std::vector<std::string> warnings;
};
LoadedDataset load_dataset(const DatasetManifest& manifest, double fs_override, unsigned jobs = 1);

/// Majority vote of select_mother_wavelet over the signals at `rows`; ties go
/// to the earlier candidate.
std::string choose_mother_wavelet(const std::vector<Signal>& signals,
                                  std::span<const std::size_t> rows,
                                  const std::vector<std::string>& candidates, unsigned jobs = 1);

/// Runs layers 1..max_layer, stopping at the first whose score reaches tau.
PipelineReport run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config);
PipelineReport run_pipeline(std::vector<Signal> signals, const std::string& dataset_name,
                            const std::vector<std::string>& class_names,
                            const PipelineConfig& config);

/// Halting layer's features in greedy order, at most `top`.
std::vector<Recommendation> recommend(const PipelineReport& report, std::size_t top);

/// One row per PCA result; pipeline accuracy and SoA cells filled when known.
std::vector<ComparisonRow> compare_report(const PipelineReport* report,
                                          const std::vector<PcaBaselineResult>& pca,
                                          std::optional<double> soa_accuracy = std::nullopt,
                                          std::optional<std::size_t> soa_features = std::nullopt,
                                          const std::string& dataset = "");
std::string render_comparison(const std::vector<ComparisonRow>& rows);

/// Structured report (byte-stable for identical inputs) and its reader.
std::string report_to_json(const PipelineReport& report);
PipelineReport report_from_json(const std::string& text);
/// Human-readable report, including per-layer wall time.
std::string report_to_text(const PipelineReport& report, std::size_t top = 15);

}  // namespace featforge
