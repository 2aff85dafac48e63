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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featforge/feature_bank.hpp"

namespace featforge {

/// Equal-frequency discretization of every column.
struct DiscretizedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bin_count = 0;
  std::vector<int> bins;  // column-major: bins[col * rows + row]
  std::vector<std::vector<double>> cut_points;

  std::span<const int> column(std::size_t c) const {
    return {bins.data() + c * rows, rows};
  }
};

DiscretizedMatrix discretize(const FeatureMatrix& matrix, std::size_t bin_count = 10);
DiscretizedMatrix discretize(const Eigen::MatrixXd& values, std::size_t bin_count = 10);

/// Plug-in mutual information estimate in nats.
double mutual_information(std::span<const int> x, std::span<const int> y);

enum class SelectionMethod { kMrmr, kMrms, kUnion };
std::string_view to_string(SelectionMethod method) noexcept;

struct SelectionResult {
  SelectionMethod method = SelectionMethod::kMrmr;
  std::vector<std::size_t> selected;
  std::vector<double> step_scores;
  std::size_t k = 0;
};

/// Criterion values closer than this are ties, resolved to the lowest column.
inline constexpr double kSelectionTieTolerance = 1e-12;

/// Greedy mRMR, difference form: relevance minus mean redundancy.
SelectionResult mrmr_select(const DiscretizedMatrix& disc, std::span<const int> labels,
                            std::size_t k);

/// Rough-set dependency degree: fraction of rows whose equivalence class
/// under `features` carries a single label.
double dependency_degree(const DiscretizedMatrix& disc, std::span<const int> labels,
                         std::span<const std::size_t> features);

/// Greedy MRMS: beta * relevance + (1 - beta) * significance.
SelectionResult mrms_select(const DiscretizedMatrix& disc, std::span<const int> labels,
                            std::size_t k, double beta = 0.5);

/// x's picks first, then y's unseen picks.
SelectionResult union_select(const SelectionResult& x, const SelectionResult& y);

struct EvaluationOutcome {
  double score = 0.0;
  std::string detail;  // free text describing what produced the score
};

/// Scores a candidate column set (indices into the full matrix).
using Evaluator = std::function<EvaluationOutcome(std::span<const std::size_t> columns)>;

struct SelectionOptions {
  std::vector<std::size_t> k_schedule = {5, 10, 15, 20, 25};
  std::size_t bin_count = 10;
  double mrms_beta = 0.5;
  /// Columns kept by the relevance pre-screen before greedy selection.
  std::size_t prescreen = 2000;
};

struct IterationRecord {
  std::size_t k = 0;
  SelectionResult mrmr;
  SelectionResult mrms;
  SelectionResult z;  // indices into the full matrix
  EvaluationOutcome outcome;
};

struct IterativeResult {
  SelectionResult z;
  EvaluationOutcome outcome;
  std::size_t k = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  std::size_t candidate_count = 0;  // columns surviving the pre-filters
};

/// Drops zero-variance columns and keeps the `prescreen` most label-relevant
/// ones. Returns surviving column indices in ascending order.
std::vector<std::size_t> prescreen_columns(const FeatureMatrix& matrix, std::size_t bin_count,
                                           std::size_t keep);

/// Grows k along the schedule until the evaluator reaches tau. Falls back to
/// the best-scoring k (earliest on ties) when none does.
IterativeResult iterative_k(const FeatureMatrix& matrix, const Evaluator& evaluator, double tau,
                            const SelectionOptions& options = {});

/// Upper bound on |z| for the exhaustive subset search.
inline constexpr std::size_t kExhaustiveLimit = 15;

struct SubsetSearchResult {
  std::vector<std::size_t> best;  // in z's order
  EvaluationOutcome outcome;
  std::size_t evaluated = 0;
};

/// Scores every non-empty subset of `z`. Best = highest score, then fewer
/// features, then earliest in enumeration order. Returns nullopt when z is
/// larger than `limit`.
std::optional<SubsetSearchResult> exhaustive_subsets(std::span<const std::size_t> z,
                                                     const Evaluator& evaluator,
                                                     std::size_t limit = kExhaustiveLimit,
                                                     unsigned jobs = 1);

}  // namespace featforge
