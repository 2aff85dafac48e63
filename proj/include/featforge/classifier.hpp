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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "featforge/feature_bank.hpp"

namespace featforge {

enum class KernelKind { kLinear, kRbf, kSigmoid, kPolynomial };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind kernel_kind_from_string(std::string_view text);

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double gamma = 0.1;
  double coef0 = 0.0;
  int degree = 3;
  double C = 1.0;

  void validate() const;
  /// e.g. "rbf(C=10,gamma=0.1)"; only parameters the kernel uses are shown.
  std::string describe() const;
  bool operator==(const KernelSpec&) const = default;
};

double kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

struct KernelGridValues {
  std::vector<KernelKind> kinds = {KernelKind::kLinear, KernelKind::kRbf, KernelKind::kSigmoid,
                                   KernelKind::kPolynomial};
  std::vector<double> c_values = {0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_values = {0.01, 0.1, 1.0};
  std::vector<int> degree_values = {2, 3};
  std::vector<double> coef0_values = {0.0, 1.0};
};

/// Cartesian product over the parameters each kernel uses, kinds in the
/// order given.
std::vector<KernelSpec> make_kernel_grid(const KernelGridValues& values = {});

struct SolverOptions {
  double tolerance = 1e-3;      // KKT violation at which SMO stops
  std::size_t max_passes = 10000;
  bool standardize = true;
};

/// One binary machine: decision(x) = sum_i alpha_i y_i K(sv_i, x) - rho.
struct BinaryMachine {
  int positive_class = 0;
  Eigen::MatrixXd support;               // rows in standardized space
  std::vector<double> alpha;             // one per support row
  std::vector<int> y;                    // +1 / -1 per support row
  std::vector<std::size_t> source_rows;  // row index in the training matrix
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

struct TrainedModel {
  KernelSpec kernel;
  std::vector<std::string> feature_names;
  Eigen::VectorXd scale_mean;
  Eigen::VectorXd scale_std;
  std::vector<int> classes;              // sorted ascending
  std::vector<BinaryMachine> machines;   // 1 for binary, one per class otherwise

  std::size_t feature_count() const { return static_cast<std::size_t>(scale_mean.size()); }
};

TrainedModel train_svm(const FeatureMatrix& matrix, const KernelSpec& kernel,
                       const SolverOptions& options = {});

/// Decision values, one column per machine.
Eigen::MatrixXd decision_values(const TrainedModel& model, const Eigen::MatrixXd& rows);
std::vector<int> predict(const TrainedModel& model, const Eigen::MatrixXd& rows);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const TrainedModel& model, std::size_t machine = 0);

/// 0 <= alpha <= C and |sum alpha_i y_i| <= 1e-6 for every machine.
bool dual_feasible(const TrainedModel& model);

/// Process-wide tally of models trained and of dual-feasibility failures.
struct SvmAudit {
  std::uint64_t trained = 0;
  std::uint64_t infeasible = 0;
};
SvmAudit svm_audit();

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Metrics

enum class MetricKind { kAccuracy, kSensitivity, kSpecificity, kFScore };
std::string_view to_string(MetricKind kind) noexcept;
MetricKind metric_from_string(std::string_view text);

struct Metrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f_score = 0.0;
  std::vector<int> classes;
  /// confusion[actual][predicted], indexed like `classes`.
  std::vector<std::vector<std::size_t>> confusion;

  double value(MetricKind kind) const;
};

/// Binary: the second class is positive. More classes: one-vs-rest macro
/// averages for sensitivity, specificity and F-score.
Metrics metrics_from_confusion(std::vector<int> classes,
                               std::vector<std::vector<std::size_t>> confusion);
Metrics compute_metrics(std::span<const int> actual, std::span<const int> predicted,
                        std::span<const int> classes);

// ---------------------------------------------------------------------------
// Folds

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldAssignment {
  std::string protocol;
  std::vector<Fold> folds;
  /// Grouped protocols: the balanced subsets each fold set is drawn from.
  std::vector<std::vector<std::size_t>> groups;
  /// Instances placed in more than one group.
  std::vector<std::size_t> shared;
  /// Instances no group uses.
  std::vector<std::size_t> unassigned;
};

/// Protocols: "stratified-k" (k from `k`), "stratified-<n>", "bearing-5fold",
/// "bp-3set". Grouped protocols run a stratified-k split inside each group.
FoldAssignment make_folds(std::span<const int> labels, std::string_view protocol,
                          std::size_t k = 5, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Cross-validation

/// Fits on the training rows of a fold and maps both sides. Used by the PCA
/// baseline to keep the projection inside the fold.
using FoldTransform = std::function<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(
    const Eigen::MatrixXd& train, const Eigen::MatrixXd& test)>;

struct CvOptions {
  unsigned jobs = 1;
  SolverOptions solver;
  FoldTransform transform;
};

struct GridPointResult {
  KernelSpec spec;
  double mean_accuracy = 0.0;
  Metrics pooled;
};

struct CvResult {
  KernelSpec best;
  double mean_accuracy = 0.0;
  Metrics metrics;  // pooled confusion of the best grid point
  std::vector<GridPointResult> grid;
  bool leakage_audit_passed = true;
  std::size_t models_trained = 0;
};

CvResult evaluate_cv(const FeatureMatrix& matrix, std::span<const KernelSpec> grid,
                     const FoldAssignment& folds, const CvOptions& options = {});

/// Process-wide tally of evaluate_cv calls and of those whose leakage audit failed.
struct CvAudit {
  std::uint64_t runs = 0;
  std::uint64_t leaked = 0;
};
CvAudit cv_audit();

}  // namespace featforge
