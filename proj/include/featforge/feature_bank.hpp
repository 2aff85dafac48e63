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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "featforge/signal_io.hpp"
#include "featforge/transforms.hpp"

namespace featforge {

enum class FeatureFamily {
  kTimeDomain,
  kFrequencyDomain,
  kWavelet,
  kSpectral,
  kStatistical,
  kPeakTrough,
  kRatio,
  kDerivative,
};

std::string_view to_string(FeatureFamily family) noexcept;
FeatureFamily family_from_string(std::string_view text);

/// Human-readable lineage of one feature column.
///
/// `lineage` is an ordered list of `key:value` construction steps, e.g.
/// {"signal:mean_subtracted", "window:3[start=384,len=256]",
///  "transform:stft[fft=256,taper=hann]", "feature:spectral_centroid"}.
struct FeatureDescriptor {
  int layer = 1;
  FeatureFamily family = FeatureFamily::kTimeDomain;
  std::string name;
  std::vector<std::string> lineage;

  /// "L2/spectral_centroid/win=7 | layer 2 | window 7 | transform stft[...] | ..."
  std::string explain() const;
};

/// One signal's features with matching descriptors.
struct FeatureRow {
  std::vector<double> values;
  std::vector<FeatureDescriptor> descriptors;

  void append(FeatureRow&& other);
};

/// Instances x features, one descriptor per column, one label per row.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<FeatureDescriptor> descriptors;
  std::vector<int> labels;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  /// Throws when shapes disagree, names repeat, or a value is non-finite.
  void validate() const;

  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Column-wise concatenation; labels must agree.
  FeatureMatrix append_columns(const FeatureMatrix& other) const;
};

// ---------------------------------------------------------------------------
// Per-window feature kinds (layer 2)

inline constexpr std::size_t kSpectralFeatureCount = 10;
inline constexpr std::size_t kStatisticalFeatureCount = 6;
inline constexpr std::size_t kPeakTroughFeatureCount = 4;
inline constexpr std::size_t kLayer2KindCount =
    kSpectralFeatureCount + kStatisticalFeatureCount + kPeakTroughFeatureCount;
inline constexpr std::size_t kLayer3RatioCount = 10;
inline constexpr std::size_t kLayer3FeatureCount = 2 * kLayer2KindCount + kLayer3RatioCount;

/// Names of the 20 per-window kinds, in emission order.
const std::array<std::string_view, kLayer2KindCount>& layer2_kind_names();

/// The fixed operand pairs used for layer-3 ratio features (indices into
/// layer2_kind_names()).
const std::array<std::pair<std::size_t, std::size_t>, kLayer3RatioCount>& layer3_ratio_pairs();

struct SpectralFeatures {
  double centroid = 0, crest = 0, decrease = 0, flatness = 0, flux = 0;
  double kurtosis = 0, rolloff = 0, skewness = 0, slope = 0, spread = 0;

  std::array<double, kSpectralFeatureCount> as_array() const;
};

/// `previous` is the preceding window's spectrum (empty for the first window).
SpectralFeatures spectral_features(const Spectrum& spectrum,
                                   std::span<const double> previous = {});

struct StatisticalFeatures {
  double mean = 0, variance = 0, std_dev = 0, rms = 0, skewness = 0, kurtosis = 0;

  std::array<double, kStatisticalFeatureCount> as_array() const;
};

StatisticalFeatures statistical_features(std::span<const double> window);

struct PeakTroughFeatures {
  double peak_amplitude = 0, trough_amplitude = 0, peak_distance = 0, trough_distance = 0;

  std::array<double, kPeakTroughFeatureCount> as_array() const;
};

/// Relative prominence a local extremum needs, as a fraction of max - min.
inline constexpr double kPeakProminenceFraction = 0.1;

/// Indices of strict local maxima whose prominence clears the threshold.
std::vector<std::size_t> find_peaks(std::span<const double> x);
PeakTroughFeatures peaktrough_features(std::span<const double> window);

// ---------------------------------------------------------------------------
// Layer extraction

struct ExtractionParams {
  WindowPlan plan;
  std::size_t fft_size = 256;
  std::string wavelet = "db4";
  Taper taper = Taper::kHann;
};

FeatureRow extract_fl1(const Signal& signal, const ExtractionParams& params);
FeatureRow extract_fl2(const Signal& signal, const ExtractionParams& params);
/// Derived from a layer-2 row fragment (20 values per window, window-major).
FeatureRow extract_fl3(const FeatureRow& fl2);

struct FeatureBudget {
  std::uint64_t n = 0;
  double fs = 0.0;
  std::uint64_t windows = 0;
  // Exact counts as produced by the extractors.
  std::uint64_t td = 0, fd = 0, dwt = 0;
  std::uint64_t l1_count = 0, l2_count = 0, l3_count = 0, total = 0;
  // Order-of-magnitude figures using the 3n / 120n / 480n approximations.
  std::uint64_t l1_approx = 0, l2_approx = 0, l3_approx = 0, total_approx = 0;
  std::uint64_t cumulative_l2_approx = 0;

  /// Text rendering, including the alternative 30n total.
  std::string describe() const;
};

FeatureBudget feature_budget(std::uint64_t n, double fs, std::size_t fft_size = 256);

/// Assembles the selected layers for every signal. Signals must share a
/// length. Rows are computed in parallel over `jobs` workers and assembled in
/// input order.
FeatureMatrix extract_matrix(std::span<const Signal> signals, const ExtractionParams& params,
                             std::span<const int> layers, unsigned jobs = 1);

/// CSV: header of descriptor names then `label`; one row per instance.
void write_feature_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);
/// Sidecar JSON: one record per column (name, layer, family, lineage).
void write_descriptor_sidecar(const FeatureMatrix& matrix, const std::filesystem::path& path);
std::vector<FeatureDescriptor> read_descriptor_sidecar(const std::filesystem::path& path);

}  // namespace featforge
