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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "featforge/classifier.hpp"
#include "featforge/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace featforge;
using fftest::error_code;

namespace {

FeatureMatrix make_matrix(const Eigen::MatrixXd& values, std::vector<int> labels) {
  FeatureMatrix m;
  m.values = values;
  m.labels = std::move(labels);
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    m.descriptors.push_back({1, FeatureFamily::kTimeDomain, "x" + std::to_string(c), {"test:col"}});
  }
  return m;
}

FeatureMatrix xor_points() {
  Eigen::MatrixXd v(4, 2);
  v << 0, 0, 1, 1, 0, 1, 1, 0;
  return make_matrix(v, {0, 0, 1, 1});
}

// Gaussian blobs centered at `separation * class` along every axis.
FeatureMatrix blobs(Rng& rng, std::size_t per_class, int classes, std::size_t dims, double separation) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(per_class) * classes, static_cast<Eigen::Index>(dims));
  std::vector<int> labels;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto r = static_cast<Eigen::Index>(labels.size());
      for (std::size_t d = 0; d < dims; ++d) {
        const double center = (d % static_cast<std::size_t>(classes)) == static_cast<std::size_t>(c) ? separation : 0.0;
        v(r, static_cast<Eigen::Index>(d)) = center + rng.normal();
      }
      labels.push_back(c);
    }
  }
  return make_matrix(v, labels);
}

double training_accuracy(const TrainedModel& m, const FeatureMatrix& data) {
  const auto p = predict(m, data.values);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == data.labels[i];
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

}  // namespace

TEST_CASE("kernel grid and descriptions") {
  const KernelGridValues values;
  const auto grid = make_kernel_grid(values);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& s : grid) ++counts[static_cast<int>(s.kind)];
  const std::size_t nc = values.c_values.size(), ng = values.gamma_values.size();
  const std::size_t nd = values.degree_values.size(), n0 = values.coef0_values.size();
  CHECK(counts[0] == nc);
  CHECK(counts[1] == nc * ng);
  CHECK(counts[2] == nc * ng * n0);
  CHECK(counts[3] == nc * ng * n0 * nd);
  CHECK(grid.front().kind == KernelKind::kLinear);

  KernelSpec rbf{KernelKind::kRbf, 0.1, 0.0, 3, 10.0};
  CHECK(rbf.describe() == "rbf(C=10,gamma=0.1)");
  KernelSpec bad = rbf;
  bad.C = 0.0;
  CHECK(error_code([&] { bad.validate(); }) == ErrorCode::kInvalidArgument);
  KernelSpec poly{KernelKind::kPolynomial, 1.0, 1.0, 1, 1.0};
  CHECK(error_code([&] { poly.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(kernel_kind_from_string("sigmoid") == KernelKind::kSigmoid);
}

TEST_CASE("kernel values") {
  Eigen::VectorXd a(2), b(2);
  a << 1, 2;
  b << 3, -1;
  CHECK(kernel_value({KernelKind::kLinear}, a, b) == doctest::Approx(1.0));
  CHECK(kernel_value({KernelKind::kRbf, 0.5}, a, b) == doctest::Approx(std::exp(-0.5 * 13.0)));
  CHECK(kernel_value({KernelKind::kSigmoid, 0.5, 1.0}, a, b) == doctest::Approx(std::tanh(1.5)));
  CHECK(kernel_value({KernelKind::kPolynomial, 0.5, 1.0, 3}, a, b) == doctest::Approx(std::pow(1.5, 3)));
}

TEST_CASE("two separable points") {
  Eigen::MatrixXd v(2, 1);
  v << -1, 1;
  const auto data = make_matrix(v, {0, 1});
  const auto m = train_svm(data, {KernelKind::kLinear, 0.1, 0, 3, 1.0});
  CHECK(training_accuracy(m, data) == 1.0);
  const auto dv = decision_values(m, v);
  CHECK(dv(0, 0) <= 0.0);
  CHECK(dv(1, 0) >= 0.0);
  CHECK(dual_feasible(m));
}

TEST_CASE("XOR needs a nonlinear kernel") {
  const auto data = xor_points();
  const auto rbf = train_svm(data, {KernelKind::kRbf, 1.0, 0.0, 3, 10.0});
  CHECK(training_accuracy(rbf, data) == 1.0);
  const auto lin = train_svm(data, {KernelKind::kLinear, 0.1, 0.0, 3, 10.0});
  CHECK(training_accuracy(lin, data) <= 0.75);
}

TEST_CASE("property: SMO reaches the QP optimum on 6-point problems") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd v(6, 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
    std::vector<int> labels{0, 1, 0, 1, 0, 1};
    rng.shuffle(labels);
    const double C = std::vector<double>{0.5, 1.0, 10.0}[static_cast<std::size_t>(trial % 3)];
    const KernelSpec spec{KernelKind::kRbf, 0.5 + rng.uniform(), 0.0, 3, C};
    SolverOptions opt;
    opt.standardize = false;
    const auto model = train_svm(make_matrix(v, labels), spec, opt);
    CHECK(dual_feasible(model));

    Eigen::MatrixXd K(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) K(i, j) = kernel_value(spec, v.row(i).transpose(), v.row(j).transpose());
    }
    std::vector<int> y;
    for (int l : labels) y.push_back(l == 1 ? 1 : -1);
    const double oracle = fftest::svm_dual_oracle(K, y, C);
    CHECK(std::abs(dual_objective(model) - oracle) <= 1e-4);
  }
}

TEST_CASE("predictions on separable data") {
  Rng rng(52);
  const auto data = blobs(rng, 20, 2, 3, 6.0);
  const auto m = train_svm(data, {KernelKind::kLinear, 0.1, 0.0, 3, 100.0});
  CHECK(predict(m, data.values) == data.labels);

  Eigen::MatrixXd twice(2, 3);
  twice.row(0) = data.values.row(5);
  twice.row(1) = data.values.row(5);
  const auto p = predict(m, twice);
  CHECK(p[0] == p[1]);

  // Support rows take their own training label.
  for (auto src : m.machines[0].source_rows) {
    Eigen::MatrixXd row = data.values.row(static_cast<Eigen::Index>(src));
    CHECK(predict(m, row)[0] == data.labels[src]);
  }
  CHECK(error_code([&] { predict(m, Eigen::MatrixXd::Zero(1, 2)); }) == ErrorCode::kWidthMismatch);
}

TEST_CASE("training preconditions") {
  Eigen::MatrixXd v(3, 1);
  v << 1, 2, 3;
  CHECK(error_code([&] { train_svm(make_matrix(v, {1, 1, 1}), {}); }) == ErrorCode::kSingleClass);
  CHECK(error_code([&] { train_svm(make_matrix(Eigen::MatrixXd(0, 0), {}), {}); }) ==
        ErrorCode::kDegenerateMatrix);
}

TEST_CASE("one-vs-rest for three classes") {
  Rng rng(53);
  const auto data = blobs(rng, 15, 3, 3, 8.0);
  const auto m = train_svm(data, {KernelKind::kRbf, 0.1, 0.0, 3, 10.0});
  CHECK(m.machines.size() == 3);
  CHECK(training_accuracy(m, data) == 1.0);
  CHECK(dual_feasible(m));
}

TEST_CASE("property: predictions survive per-feature affine rescaling") {
  Rng rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = blobs(rng, 20, 2, 4, 2.0);
    auto scaled = data;
    for (Eigen::Index c = 0; c < scaled.values.cols(); ++c) {
      const double a = 0.01 + 100.0 * rng.uniform();
      const double b = rng.normal(0.0, 50.0);
      scaled.values.col(c) = (scaled.values.col(c).array() * a + b).matrix();
    }
    const KernelSpec spec{KernelKind::kRbf, 0.1, 0.0, 3, 1.0};
    CHECK(predict(train_svm(data, spec), data.values) == predict(train_svm(scaled, spec), scaled.values));
  }
}

TEST_CASE("model save and load") {
  fftest::TempDir dir;
  Rng rng(55);
  const auto data = blobs(rng, 10, 3, 2, 3.0);
  const auto m = train_svm(data, {KernelKind::kPolynomial, 0.5, 1.0, 2, 1.0});
  save_model(m, dir / "m.txt");
  const auto back = load_model(dir / "m.txt");
  CHECK(back.kernel == m.kernel);
  CHECK(back.classes == m.classes);
  CHECK(back.feature_names == m.feature_names);
  CHECK(decision_values(back, data.values).isApprox(decision_values(m, data.values), 1e-12));
  CHECK(fftest::read_text(dir / "m.txt").rfind("featforge-svm 1", 0) == 0);
}

TEST_CASE("metric arithmetic") {
  // confusion[actual][predicted]; class 1 is positive.
  const auto m = metrics_from_confusion({0, 1}, {{8, 2}, {1, 9}});
  CHECK(m.sensitivity == 0.9);
  CHECK(m.specificity == 0.8);
  CHECK(m.accuracy == 0.85);
  const double precision = 9.0 / 11.0;
  CHECK(m.f_score == doctest::Approx(2 * precision * 0.9 / (precision + 0.9)));
  CHECK(m.value(MetricKind::kSpecificity) == 0.8);

  const auto none = metrics_from_confusion({0, 1}, {{5, 0}, {0, 0}});
  CHECK(none.sensitivity == 0.0);
  CHECK(none.f_score == 0.0);
  CHECK(none.specificity == 1.0);

  const std::vector<int> actual{0, 1, 1, 0}, predicted{0, 1, 0, 0}, classes{0, 1};
  const auto c = compute_metrics(actual, predicted, classes);
  CHECK(c.accuracy == 0.75);
  CHECK(c.confusion[1][0] == 1);
  CHECK(metric_from_string("f_score") == MetricKind::kFScore);
}

TEST_CASE("property: metric bounds and accuracy identity") {
  Rng rng(56);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 2 + rng.below(3);
    std::vector<std::vector<std::size_t>> conf(c, std::vector<std::size_t>(c));
    std::size_t trace = 0, total = 0;
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t p = 0; p < c; ++p) {
        conf[a][p] = rng.below(20);
        total += conf[a][p];
        if (a == p) trace += conf[a][p];
      }
    }
    std::vector<int> classes(c);
    std::iota(classes.begin(), classes.end(), 0);
    const auto m = metrics_from_confusion(classes, conf);
    for (double v : {m.accuracy, m.sensitivity, m.specificity, m.f_score}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.accuracy == (total ? static_cast<double>(trace) / static_cast<double>(total) : 0.0));
  }
}

TEST_CASE("bearing fold protocol composition") {
  std::vector<int> labels(3652, 0);
  labels.resize(3652 + 282, 1);
  const auto fa = make_folds(labels, "bearing-5fold", 5, 3);
  REQUIRE(fa.groups.size() == 5);
  std::set<std::size_t> majority_seen;
  for (const auto& g : fa.groups) {
    std::size_t good = 0, faulty = 0;
    for (auto i : g) {
      (labels[i] == 0 ? good : faulty)++;
      if (labels[i] == 0) CHECK(majority_seen.insert(i).second);
    }
    CHECK(good == 730);
    CHECK(faulty == 282);
  }
  CHECK(fa.shared.size() == 282);
  CHECK(fa.unassigned.size() == 2);
  CHECK(fa.folds.size() == 25);
}

TEST_CASE("bp fold protocol composition") {
  std::vector<int> labels(103, 0);
  labels.resize(118, 1);
  const auto fa = make_folds(labels, "bp-3set", 5, 1);
  REQUIRE(fa.groups.size() == 3);
  for (const auto& g : fa.groups) {
    std::size_t low = 0, high = 0;
    for (auto i : g) (labels[i] == 0 ? low : high)++;
    CHECK(low == 34);
    CHECK(high == 15);
  }
  CHECK(fa.unassigned.size() == 1);
  std::vector<int> tiny{0, 0, 1};
  CHECK(error_code([&] { make_folds(tiny, "bp-3set", 5, 1); }) == ErrorCode::kProtocolCompositionImpossible);
}

TEST_CASE("stratified folds partition each class") {
  std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto fa = make_folds(labels, "stratified-2", 5, 7);
  REQUIRE(fa.folds.size() == 2);
  std::multiset<std::size_t> tested;
  for (const auto& f : fa.folds) {
    CHECK(f.test.size() == 5);
    std::set<int> present;
    for (auto i : f.test) present.insert(labels[i]);
    CHECK(present.size() == 2);
    tested.insert(f.test.begin(), f.test.end());
    CHECK(f.train.size() + f.test.size() == 10);
  }
  CHECK(tested.size() == 10);
  CHECK(std::set<std::size_t>(tested.begin(), tested.end()).size() == 10);

  const auto again = make_folds(labels, "stratified-2", 5, 7);
  CHECK(again.folds[0].test == fa.folds[0].test);
  CHECK(error_code([&] { make_folds(labels, "stratified-6", 5, 7); }) ==
        ErrorCode::kProtocolCompositionImpossible);
  CHECK(error_code([&] { make_folds(labels, "leave-one-out", 5, 7); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("cross-validation") {
  Rng rng(57);
  const auto data = blobs(rng, 25, 2, 3, 6.0);
  const auto folds = make_folds(data.labels, "stratified-k", 5, 0);
  const std::vector<KernelSpec> one{{KernelKind::kRbf, 0.1, 0.0, 3, 1.0}};
  const auto r1 = evaluate_cv(data, one, folds);
  CHECK(r1.best == one[0]);
  CHECK(r1.mean_accuracy == 1.0);
  CHECK(r1.metrics.accuracy == 1.0);
  CHECK(r1.leakage_audit_passed);

  const auto grid = make_kernel_grid();
  CvOptions serial, parallel;
  parallel.jobs = 4;
  const auto a = evaluate_cv(data, grid, folds, serial);
  const auto b = evaluate_cv(data, grid, folds, parallel);
  CHECK(a.best == b.best);
  CHECK(a.metrics.confusion == b.metrics.confusion);
  CHECK(a.leakage_audit_passed);
  CHECK(a.models_trained == grid.size() * 5);
  // Ties on accuracy go to the earliest kernel family, then the smallest C.
  CHECK(a.best.kind == KernelKind::kLinear);
  CHECK(a.best.C == 0.1);
}

TEST_CASE("leakage audit flags overlapping folds") {
  Rng rng(58);
  const auto data = blobs(rng, 10, 2, 2, 4.0);
  auto folds = make_folds(data.labels, "stratified-2", 5, 0);
  folds.folds[0].train.push_back(folds.folds[0].test.front());
  const std::vector<KernelSpec> one{{KernelKind::kLinear, 0.1, 0.0, 3, 1.0}};
  CHECK_FALSE(evaluate_cv(data, one, folds).leakage_audit_passed);
}

TEST_CASE("every model trained in this suite was dual-feasible") {
  const auto audit = svm_audit();
  CHECK(audit.trained > 0);
  CHECK(audit.infeasible == 0);
}
