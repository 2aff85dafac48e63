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

#include "featforge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "featforge/error.hpp"
#include "featforge/parallel.hpp"

namespace featforge {

std::string_view to_string(SelectionMethod method) noexcept {
  switch (method) {
    case SelectionMethod::kMrmr: return "mRMR";
    case SelectionMethod::kMrms: return "MRMS";
    case SelectionMethod::kUnion: return "union";
  }
  return "?";
}

DiscretizedMatrix discretize(const Eigen::MatrixXd& values, std::size_t bin_count) {
  if (bin_count < 2) throw Error(ErrorCode::kInvalidArgument, "bin count must be >= 2");
  DiscretizedMatrix d;
  d.rows = static_cast<std::size_t>(values.rows());
  d.cols = static_cast<std::size_t>(values.cols());
  d.bin_count = bin_count;
  d.bins.assign(d.rows * d.cols, 0);
  d.cut_points.resize(d.cols);
  std::vector<double> sorted(d.rows);
  for (std::size_t c = 0; c < d.cols; ++c) {
    const auto col = values.col(static_cast<Eigen::Index>(c));
    for (std::size_t r = 0; r < d.rows; ++r) sorted[r] = col(static_cast<Eigen::Index>(r));
    std::sort(sorted.begin(), sorted.end());
    auto& cuts = d.cut_points[c];
    if (d.rows > 0) {
      for (std::size_t b = 1; b < bin_count; ++b) {
        const double cut = sorted[b * d.rows / bin_count];
        // A cut at the minimum would leave bin 0 empty.
        if (cut > sorted.front() && (cuts.empty() || cut > cuts.back())) cuts.push_back(cut);
      }
    }
    for (std::size_t r = 0; r < d.rows; ++r) {
      const double v = col(static_cast<Eigen::Index>(r));
      d.bins[c * d.rows + r] =
          static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    }
  }
  return d;
}

DiscretizedMatrix discretize(const FeatureMatrix& matrix, std::size_t bin_count) {
  return discretize(matrix.values, bin_count);
}

double mutual_information(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kWidthMismatch, "columns differ in length");
  if (x.empty()) return 0.0;
  int ax = 0, ay = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || y[i] < 0) {
      throw Error(ErrorCode::kInvalidArgument, "discrete values must be non-negative");
    }
    ax = std::max(ax, x[i] + 1);
    ay = std::max(ay, y[i] + 1);
  }
  std::vector<std::size_t> joint(static_cast<std::size_t>(ax) * static_cast<std::size_t>(ay), 0);
  std::vector<std::size_t> px(static_cast<std::size_t>(ax), 0), py(static_cast<std::size_t>(ay), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++joint[static_cast<std::size_t>(x[i]) * static_cast<std::size_t>(ay) +
            static_cast<std::size_t>(y[i])];
    ++px[static_cast<std::size_t>(x[i])];
    ++py[static_cast<std::size_t>(y[i])];
  }
  const double n = static_cast<double>(x.size());
  double mi = 0.0;
  for (std::size_t a = 0; a < px.size(); ++a) {
    for (std::size_t b = 0; b < py.size(); ++b) {
      const auto nab = joint[a * py.size() + b];
      if (nab == 0) continue;
      const double p = static_cast<double>(nab) / n;
      mi += p * std::log(static_cast<double>(nab) * n /
                         (static_cast<double>(px[a]) * static_cast<double>(py[b])));
    }
  }
  return std::max(mi, 0.0);
}

namespace {

void check_k(const DiscretizedMatrix& disc, std::span<const int> labels, std::size_t k) {
  if (labels.size() != disc.rows) {
    throw Error(ErrorCode::kWidthMismatch, "label count differs from row count");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (k > disc.cols) {
    throw Error(ErrorCode::kKTooLarge,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(disc.cols) + " features");
  }
}

// Index of the best criterion value among unselected columns; lowest index
// wins within kSelectionTieTolerance.
std::size_t argmax_unselected(const std::vector<double>& crit, const std::vector<char>& taken) {
  std::size_t best = crit.size();
  for (std::size_t f = 0; f < crit.size(); ++f) {
    if (taken[f]) continue;
    if (best == crit.size() || crit[f] > crit[best] + kSelectionTieTolerance) best = f;
  }
  return best;
}

}  // namespace

SelectionResult mrmr_select(const DiscretizedMatrix& disc, std::span<const int> labels,
                            std::size_t k) {
  check_k(disc, labels, k);
  SelectionResult out;
  out.method = SelectionMethod::kMrmr;
  out.k = k;
  std::vector<double> relevance(disc.cols);
  for (std::size_t f = 0; f < disc.cols; ++f) relevance[f] = mutual_information(disc.column(f), labels);
  std::vector<double> redundancy(disc.cols, 0.0);
  std::vector<char> taken(disc.cols, 0);
  std::vector<double> crit(disc.cols);
  for (std::size_t step = 0; step < k; ++step) {
    for (std::size_t f = 0; f < disc.cols; ++f) {
      crit[f] = step == 0 ? relevance[f]
                          : relevance[f] - redundancy[f] / static_cast<double>(step);
    }
    const std::size_t pick = argmax_unselected(crit, taken);
    taken[pick] = 1;
    out.selected.push_back(pick);
    out.step_scores.push_back(crit[pick]);
    if (step + 1 == k) break;
    for (std::size_t f = 0; f < disc.cols; ++f) {
      if (!taken[f]) redundancy[f] += mutual_information(disc.column(f), disc.column(pick));
    }
  }
  return out;
}

namespace {

// Purity bookkeeping for a partition of the rows given as dense class ids.
double purity_fraction(std::span<const int> part, int part_count, std::span<const int> labels) {
  std::vector<int> first(static_cast<std::size_t>(part_count), -1);
  std::vector<char> mixed(static_cast<std::size_t>(part_count), 0);
  std::vector<std::size_t> count(static_cast<std::size_t>(part_count), 0);
  for (std::size_t r = 0; r < part.size(); ++r) {
    const auto p = static_cast<std::size_t>(part[r]);
    ++count[p];
    if (first[p] < 0) {
      first[p] = labels[r];
    } else if (first[p] != labels[r]) {
      mixed[p] = 1;
    }
  }
  std::size_t pure = 0;
  for (std::size_t p = 0; p < count.size(); ++p) {
    if (!mixed[p]) pure += count[p];
  }
  return part.empty() ? 0.0 : static_cast<double>(pure) / static_cast<double>(part.size());
}

// Refines `part` by the bins of one column, renumbering classes densely in
// order of first appearance.
int refine(std::span<const int> part, int part_count, std::span<const int> bins, int bin_count,
           std::vector<int>& out) {
  std::vector<int> remap(static_cast<std::size_t>(part_count) * static_cast<std::size_t>(bin_count),
                         -1);
  out.resize(part.size());
  int next = 0;
  for (std::size_t r = 0; r < part.size(); ++r) {
    auto& id = remap[static_cast<std::size_t>(part[r]) * static_cast<std::size_t>(bin_count) +
                     static_cast<std::size_t>(bins[r])];
    if (id < 0) id = next++;
    out[r] = id;
  }
  return next;
}

int max_bin(const DiscretizedMatrix& disc) {
  int m = 0;
  for (int b : disc.bins) m = std::max(m, b);
  return m + 1;
}

}  // namespace

double dependency_degree(const DiscretizedMatrix& disc, std::span<const int> labels,
                         std::span<const std::size_t> features) {
  if (labels.size() != disc.rows) {
    throw Error(ErrorCode::kWidthMismatch, "label count differs from row count");
  }
  const int bins = max_bin(disc);
  std::vector<int> part(disc.rows, 0), next;
  int count = disc.rows > 0 ? 1 : 0;
  for (auto f : features) {
    count = refine(part, count, disc.column(f), bins, next);
    part.swap(next);
  }
  return purity_fraction(part, count, labels);
}

SelectionResult mrms_select(const DiscretizedMatrix& disc, std::span<const int> labels,
                            std::size_t k, double beta) {
  check_k(disc, labels, k);
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be in [0,1]");
  SelectionResult out;
  out.method = SelectionMethod::kMrms;
  out.k = k;
  const int bins = max_bin(disc);

  std::vector<double> relevance(disc.cols);
  std::vector<int> part(disc.rows, 0), scratch;
  int part_count = disc.rows > 0 ? 1 : 0;
  for (std::size_t f = 0; f < disc.cols; ++f) {
    const int c = refine(part, part_count, disc.column(f), bins, scratch);
    relevance[f] = purity_fraction(scratch, c, labels);
  }
  double gamma_s = purity_fraction(part, part_count, labels);

  std::vector<char> taken(disc.cols, 0);
  std::vector<double> crit(disc.cols);
  std::vector<double> gamma_with(disc.cols);
  for (std::size_t step = 0; step < k; ++step) {
    for (std::size_t f = 0; f < disc.cols; ++f) {
      if (taken[f]) continue;
      const int c = refine(part, part_count, disc.column(f), bins, scratch);
      gamma_with[f] = purity_fraction(scratch, c, labels);
      crit[f] = beta * relevance[f] + (1.0 - beta) * (gamma_with[f] - gamma_s);
    }
    const std::size_t pick = argmax_unselected(crit, taken);
    taken[pick] = 1;
    out.selected.push_back(pick);
    out.step_scores.push_back(crit[pick]);
    part_count = refine(part, part_count, disc.column(pick), bins, scratch);
    part.swap(scratch);
    gamma_s = gamma_with[pick];
  }
  return out;
}

SelectionResult union_select(const SelectionResult& x, const SelectionResult& y) {
  const bool any_union = x.method == SelectionMethod::kUnion || y.method == SelectionMethod::kUnion;
  if (any_union && x.k != y.k) {
    throw Error(ErrorCode::kMethodMismatch, "cannot merge a union selection made at a different k");
  }
  SelectionResult z;
  z.method = SelectionMethod::kUnion;
  z.k = std::max(x.k, y.k);
  z.selected = x.selected;
  for (auto f : y.selected) {
    if (std::find(z.selected.begin(), z.selected.end(), f) == z.selected.end()) {
      z.selected.push_back(f);
    }
  }
  return z;
}

std::vector<std::size_t> prescreen_columns(const FeatureMatrix& matrix, std::size_t bin_count,
                                           std::size_t keep) {
  std::vector<std::size_t> varying;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto col = matrix.values.col(static_cast<Eigen::Index>(c));
    if (col.size() > 0 && col.maxCoeff() > col.minCoeff()) varying.push_back(c);
  }
  if (varying.size() <= keep) return varying;
  const auto disc = discretize(matrix.select_columns(varying).values, bin_count);
  std::vector<double> relevance(varying.size());
  for (std::size_t i = 0; i < varying.size(); ++i) {
    relevance[i] = mutual_information(disc.column(i), matrix.labels);
  }
  std::vector<std::size_t> order(varying.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
  order.resize(keep);
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (auto i : order) out.push_back(varying[i]);
  std::sort(out.begin(), out.end());
  return out;
}

IterativeResult iterative_k(const FeatureMatrix& matrix, const Evaluator& evaluator, double tau,
                            const SelectionOptions& options) {
  if (options.k_schedule.empty()) throw Error(ErrorCode::kInvalidArgument, "empty k schedule");
  for (std::size_t i = 0; i < options.k_schedule.size(); ++i) {
    if (options.k_schedule[i] == 0 ||
        (i > 0 && options.k_schedule[i] <= options.k_schedule[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "k schedule must be strictly increasing and >= 1");
    }
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be in [0,1]");

  IterativeResult result;
  const auto candidates = prescreen_columns(matrix, options.bin_count, options.prescreen);
  result.candidate_count = candidates.size();
  if (candidates.empty()) {
    throw Error(ErrorCode::kDegenerateMatrix, "every candidate feature is constant");
  }
  const auto disc = discretize(matrix.select_columns(candidates).values, options.bin_count);

  bool have_best = false;
  for (std::size_t k : options.k_schedule) {
    const std::size_t kk = std::min(k, candidates.size());
    IterationRecord rec;
    rec.k = k;
    rec.mrmr = mrmr_select(disc, matrix.labels, kk);
    rec.mrms = mrms_select(disc, matrix.labels, kk, options.mrms_beta);
    rec.z = union_select(rec.mrmr, rec.mrms);
    rec.z.k = k;
    for (auto& f : rec.mrmr.selected) f = candidates[f];
    for (auto& f : rec.mrms.selected) f = candidates[f];
    for (auto& f : rec.z.selected) f = candidates[f];
    rec.outcome = evaluator(rec.z.selected);
    result.history.push_back(rec);

    if (!have_best || rec.outcome.score > result.outcome.score) {
      have_best = true;
      result.z = rec.z;
      result.outcome = rec.outcome;
      result.k = k;
    }
    if (rec.outcome.score >= tau) {
      result.z = rec.z;
      result.outcome = rec.outcome;
      result.k = k;
      result.converged = true;
      break;
    }
    if (kk == candidates.size()) break;  // larger k cannot change the selection
  }
  return result;
}

std::optional<SubsetSearchResult> exhaustive_subsets(std::span<const std::size_t> z,
                                                     const Evaluator& evaluator, std::size_t limit,
                                                     unsigned jobs) {
  if (z.empty() || z.size() > limit || z.size() > 30) return std::nullopt;
  const std::size_t total = (std::size_t{1} << z.size()) - 1;
  std::vector<EvaluationOutcome> outcomes(total);
  std::vector<std::vector<std::size_t>> subsets(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    const std::size_t mask = i + 1;
    std::vector<std::size_t> cols;
    for (std::size_t b = 0; b < z.size(); ++b) {
      if (mask & (std::size_t{1} << b)) cols.push_back(z[b]);
    }
    outcomes[i] = evaluator(cols);
    subsets[i] = std::move(cols);
  });
  SubsetSearchResult best;
  best.evaluated = total;
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < total; ++i) {
    const double s = outcomes[i].score;
    const double b = outcomes[best_i].score;
    if (s > b || (s == b && subsets[i].size() < subsets[best_i].size())) best_i = i;
  }
  best.best = subsets[best_i];
  best.outcome = outcomes[best_i];
  return best;
}

}  // namespace featforge
