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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "featforge/classifier.hpp"
#include "featforge/feature_bank.hpp"

namespace featforge {

enum class PcaMethod { kSvd, kEig };

std::string_view to_string(PcaMethod method) noexcept;
/// Accepts "svd" and "eig"; "als" and anything else throw UnsupportedMethod.
PcaMethod pca_method_from_string(std::string_view text);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;           // p x d, orthonormal rows
  Eigen::VectorXd explained_variance;   // non-increasing
  PcaMethod method = PcaMethod::kSvd;
  /// Set when fewer than the requested components carried variance.
  bool rank_deficient = false;
  std::size_t requested = 0;

  std::size_t component_count() const { return static_cast<std::size_t>(components.rows()); }
};

/// Requires p <= min(rows - 1, cols). Components are sign-aligned so their
/// first nonzero entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t p, PcaMethod method);
PcaModel fit_pca(const FeatureMatrix& matrix, std::size_t p, PcaMethod method);

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& rows);
Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& projected);

/// Symmetric eigen-decomposition by cyclic Jacobi rotations. Eigenvalues are
/// returned in descending order with eigenvectors as matching columns.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric);

struct PcaBaselineResult {
  PcaMethod method = PcaMethod::kSvd;
  std::size_t components = 0;
  CvResult cv;
};

/// RBF grid used by the baseline: every C with every gamma.
std::vector<KernelSpec> rbf_grid(const KernelGridValues& values = {});

/// PCA fit on each fold's training rows, RBF-SVM over `grid` on the projections.
PcaBaselineResult pca_pipeline(const FeatureMatrix& matrix, std::size_t p, PcaMethod method,
                               const FoldAssignment& folds, std::span<const KernelSpec> grid,
                               unsigned jobs = 1);

}  // namespace featforge
