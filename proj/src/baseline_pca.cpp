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

#include "featforge/baseline_pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "featforge/error.hpp"

namespace featforge {

std::string_view to_string(PcaMethod method) noexcept {
  return method == PcaMethod::kSvd ? "svd" : "eig";
}

PcaMethod pca_method_from_string(std::string_view text) {
  if (text == "svd") return PcaMethod::kSvd;
  if (text == "eig") return PcaMethod::kEig;
  throw Error(ErrorCode::kUnsupportedMethod,
              "unsupported method '" + std::string(text) + "' (available: svd, eig)");
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorCode::kWidthMismatch, "matrix is not square");
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Rotation angle that zeroes a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

void align_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
      if (std::abs(components(r, c)) > 1e-8) {
        if (components(r, c) < 0.0) components.row(r) *= -1.0;
        break;
      }
    }
  }
}

// Variances at or below this fraction of the largest are treated as zero.
constexpr double kRankTolerance = 1e-10;

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t p, PcaMethod method) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto d = static_cast<std::size_t>(data.cols());
  if (n < 2 || d == 0) throw Error(ErrorCode::kDegenerateMatrix, "PCA needs at least 2 rows");
  if (p == 0 || p > std::min(n - 1, d)) {
    throw Error(ErrorCode::kInvalidArgument,
                "component count " + std::to_string(p) + " exceeds min(rows - 1, features) = " +
                    std::to_string(std::min(n - 1, d)));
  }
  PcaModel model;
  model.method = method;
  model.requested = p;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Eigen::VectorXd variance;
  Eigen::MatrixXd basis;  // d x m, columns are directions
  if (method == PcaMethod::kSvd) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    variance = svd.singularValues().array().square() / denom;
    basis = svd.matrixV();
  } else if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    auto eig = jacobi_eigen(cov);
    variance = eig.values.cwiseMax(0.0);
    basis = eig.vectors;
  } else {
    // Gram route: eigenvectors u of Xc Xc^T / (N-1) map to Xc^T u.
    const Eigen::MatrixXd g = centered * centered.transpose() / denom;
    auto eig = jacobi_eigen(g);
    variance = eig.values.cwiseMax(0.0);
    basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), variance.size());
    for (Eigen::Index i = 0; i < variance.size(); ++i) {
      if (variance(i) <= 0.0) continue;
      Eigen::VectorXd v = centered.transpose() * eig.vectors.col(i);
      const double norm = v.norm();
      if (norm > 0.0) basis.col(i) = v / norm;
    }
  }

  const double top = variance.size() > 0 ? variance(0) : 0.0;
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(variance.size()) &&
         variance(static_cast<Eigen::Index>(rank)) > kRankTolerance * top && top > 0.0) {
    ++rank;
  }
  const std::size_t kept = std::min(p, rank);
  model.rank_deficient = kept < p;
  const auto k = static_cast<Eigen::Index>(kept);
  model.components = basis.leftCols(k).transpose();
  model.explained_variance = variance.head(k);
  align_signs(model.components);
  return model;
}

PcaModel fit_pca(const FeatureMatrix& matrix, std::size_t p, PcaMethod method) {
  return fit_pca(matrix.values, p, method);
}

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.mean.size()) {
    throw Error(ErrorCode::kWidthMismatch, "rows have " + std::to_string(rows.cols()) +
                                               " columns, PCA model expects " +
                                               std::to_string(model.mean.size()));
  }
  return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& projected) {
  if (projected.cols() != model.components.rows()) {
    throw Error(ErrorCode::kWidthMismatch, "projection width differs from component count");
  }
  return (projected * model.components).rowwise() + model.mean.transpose();
}

std::vector<KernelSpec> rbf_grid(const KernelGridValues& values) {
  KernelGridValues v = values;
  v.kinds = {KernelKind::kRbf};
  return make_kernel_grid(v);
}

PcaBaselineResult pca_pipeline(const FeatureMatrix& matrix, std::size_t p, PcaMethod method,
                               const FoldAssignment& folds, std::span<const KernelSpec> grid,
                               unsigned jobs) {
  CvOptions options;
  options.jobs = jobs;
  options.transform = [p, method](const Eigen::MatrixXd& train, const Eigen::MatrixXd& test) {
    const PcaModel model = fit_pca(train, p, method);
    return std::make_pair(project(model, train), project(model, test));
  };
  PcaBaselineResult result;
  result.method = method;
  result.components = p;
  result.cv = evaluate_cv(matrix, grid, folds, options);
  return result;
}

}  // namespace featforge
