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

#include "featforge/feature_bank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "featforge/error.hpp"
#include "featforge/parallel.hpp"
#include "text_util.hpp"

namespace featforge {

std::string_view to_string(FeatureFamily family) noexcept {
  switch (family) {
    case FeatureFamily::kTimeDomain: return "TD";
    case FeatureFamily::kFrequencyDomain: return "FD";
    case FeatureFamily::kWavelet: return "DWT";
    case FeatureFamily::kSpectral: return "spectral";
    case FeatureFamily::kStatistical: return "statistical";
    case FeatureFamily::kPeakTrough: return "peaktrough";
    case FeatureFamily::kRatio: return "ratio";
    case FeatureFamily::kDerivative: return "derivative";
  }
  return "?";
}

FeatureFamily family_from_string(std::string_view text) {
  for (auto f : {FeatureFamily::kTimeDomain, FeatureFamily::kFrequencyDomain,
                 FeatureFamily::kWavelet, FeatureFamily::kSpectral, FeatureFamily::kStatistical,
                 FeatureFamily::kPeakTrough, FeatureFamily::kRatio, FeatureFamily::kDerivative}) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature family '" + std::string(text) + "'");
}

std::string FeatureDescriptor::explain() const {
  std::string out = name + " | layer " + std::to_string(layer) + " | family " +
                    std::string(to_string(family));
  for (const auto& step : lineage) {
    auto colon = step.find(':');
    out += " | ";
    if (colon == std::string::npos) {
      out += step;
    } else {
      out += step.substr(0, colon) + " " + step.substr(colon + 1);
    }
  }
  return out;
}

void FeatureRow::append(FeatureRow&& other) {
  values.insert(values.end(), other.values.begin(), other.values.end());
  descriptors.insert(descriptors.end(), std::make_move_iterator(other.descriptors.begin()),
                     std::make_move_iterator(other.descriptors.end()));
}

void FeatureMatrix::validate() const {
  if (descriptors.size() != cols()) {
    throw Error(ErrorCode::kDegenerateMatrix,
                std::to_string(cols()) + " columns but " + std::to_string(descriptors.size()) +
                    " descriptors");
  }
  if (labels.size() != rows()) {
    throw Error(ErrorCode::kDegenerateMatrix,
                std::to_string(rows()) + " rows but " + std::to_string(labels.size()) + " labels");
  }
  std::set<std::string_view> names;
  for (const auto& d : descriptors) {
    if (!names.insert(d.name).second) {
      throw Error(ErrorCode::kDegenerateMatrix, "duplicate feature name " + d.name);
    }
    if (d.lineage.empty()) throw Error(ErrorCode::kDegenerateMatrix, "empty lineage: " + d.name);
  }
  if (!values.allFinite()) throw Error(ErrorCode::kDegenerateMatrix, "non-finite feature value");
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out;
  out.labels = labels;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= cols()) throw Error(ErrorCode::kWidthMismatch, "column index out of range");
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(columns[j]));
    out.descriptors.push_back(descriptors[columns[j]]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> row_ids) const {
  FeatureMatrix out;
  out.descriptors = descriptors;
  out.values.resize(static_cast<Eigen::Index>(row_ids.size()), values.cols());
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    if (row_ids[i] >= rows()) throw Error(ErrorCode::kWidthMismatch, "row index out of range");
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(row_ids[i]));
    out.labels.push_back(labels[row_ids[i]]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::append_columns(const FeatureMatrix& other) const {
  if (other.rows() != rows() || other.labels != labels) {
    throw Error(ErrorCode::kWidthMismatch, "cannot append columns of a different instance set");
  }
  FeatureMatrix out;
  out.labels = labels;
  out.values.resize(values.rows(), values.cols() + other.values.cols());
  out.values << values, other.values;
  out.descriptors = descriptors;
  out.descriptors.insert(out.descriptors.end(), other.descriptors.begin(),
                         other.descriptors.end());
  return out;
}

// ---------------------------------------------------------------------------

const std::array<std::string_view, kLayer2KindCount>& layer2_kind_names() {
  static const std::array<std::string_view, kLayer2KindCount> names = {
      "spectral_centroid", "spectral_crest",    "spectral_decrease", "spectral_flatness",
      "spectral_flux",     "spectral_kurtosis", "spectral_rolloff",  "spectral_skewness",
      "spectral_slope",    "spectral_spread",   "stat_mean",         "stat_variance",
      "stat_std",          "stat_rms",          "stat_skewness",     "stat_kurtosis",
      "peak_amplitude",    "trough_amplitude",  "peak_distance",     "trough_distance",
  };
  return names;
}

namespace {

std::size_t kind_index(std::string_view name) {
  const auto& names = layer2_kind_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown layer-2 kind " + std::string(name));
}

FeatureFamily kind_family(std::size_t kind) {
  if (kind < kSpectralFeatureCount) return FeatureFamily::kSpectral;
  if (kind < kSpectralFeatureCount + kStatisticalFeatureCount) return FeatureFamily::kStatistical;
  return FeatureFamily::kPeakTrough;
}

}  // namespace

const std::array<std::pair<std::size_t, std::size_t>, kLayer3RatioCount>& layer3_ratio_pairs() {
  static const std::array<std::pair<std::size_t, std::size_t>, kLayer3RatioCount> pairs = {{
      {kind_index("spectral_centroid"), kind_index("spectral_spread")},
      {kind_index("spectral_crest"), kind_index("spectral_flatness")},
      {kind_index("stat_rms"), kind_index("stat_std")},
      {kind_index("peak_amplitude"), kind_index("trough_amplitude")},
      {kind_index("peak_distance"), kind_index("trough_distance")},
      {kind_index("spectral_rolloff"), kind_index("spectral_centroid")},
      {kind_index("spectral_flux"), kind_index("spectral_spread")},
      {kind_index("stat_skewness"), kind_index("stat_kurtosis")},
      {kind_index("stat_variance"), kind_index("stat_rms")},
      {kind_index("spectral_slope"), kind_index("spectral_decrease")},
  }};
  return pairs;
}

std::array<double, kSpectralFeatureCount> SpectralFeatures::as_array() const {
  return {centroid, crest, decrease, flatness, flux, kurtosis, rolloff, skewness, slope, spread};
}

std::array<double, kStatisticalFeatureCount> StatisticalFeatures::as_array() const {
  return {mean, variance, std_dev, rms, skewness, kurtosis};
}

std::array<double, kPeakTroughFeatureCount> PeakTroughFeatures::as_array() const {
  return {peak_amplitude, trough_amplitude, peak_distance, trough_distance};
}

SpectralFeatures spectral_features(const Spectrum& spectrum, std::span<const double> previous) {
  SpectralFeatures out;
  const auto& m = spectrum.magnitudes;
  const std::size_t bins = m.size();
  if (bins == 0) return out;
  if (!previous.empty() && previous.size() != bins) {
    throw Error(ErrorCode::kWidthMismatch, "previous spectrum has a different bin count");
  }
  const double sum = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(sum > 0.0)) return out;

  auto freq = [&](std::size_t k) { return static_cast<double>(k) * spectrum.bin_hz; };

  double centroid = 0.0;
  for (std::size_t k = 0; k < bins; ++k) centroid += freq(k) * m[k];
  centroid /= sum;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double d = freq(k) - centroid;
    m2 += d * d * m[k];
    m3 += d * d * d * m[k];
    m4 += d * d * d * d * m[k];
  }
  m2 /= sum;
  m3 /= sum;
  m4 /= sum;
  out.centroid = centroid;
  const double scale2 = centroid * centroid + spectrum.bin_hz * spectrum.bin_hz;
  if (m2 > 1e-18 * scale2) {
    out.spread = std::sqrt(m2);
    out.skewness = m3 / (m2 * out.spread);
    out.kurtosis = m4 / (m2 * m2);
  }

  const double mean = sum / static_cast<double>(bins);
  const double peak = *std::max_element(m.begin(), m.end());
  out.crest = peak / mean;

  bool any_zero = false;
  double log_sum = 0.0;
  for (double v : m) {
    if (v <= 0.0) {
      any_zero = true;
      break;
    }
    log_sum += std::log(v);
  }
  out.flatness = any_zero ? 0.0 : std::exp(log_sum / static_cast<double>(bins)) / mean;

  double dec_num = 0.0, dec_den = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    dec_num += (m[k] - m[0]) / static_cast<double>(k);
    dec_den += m[k];
  }
  out.decrease = dec_den > 0.0 ? dec_num / dec_den : 0.0;

  if (bins > 1) {
    double f_mean = 0.0;
    for (std::size_t k = 0; k < bins; ++k) f_mean += freq(k);
    f_mean /= static_cast<double>(bins);
    double cov = 0.0, var = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double df = freq(k) - f_mean;
      cov += df * (m[k] - mean);
      var += df * df;
    }
    out.slope = var > 0.0 ? cov / var : 0.0;
  }

  double energy = 0.0;
  for (double v : m) energy += v * v;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    cumulative += m[k] * m[k];
    if (cumulative >= 0.85 * energy) {
      out.rolloff = freq(k);
      break;
    }
  }

  const double norm = std::sqrt(energy);
  double prev_norm = 0.0;
  for (double v : previous) prev_norm += v * v;
  prev_norm = std::sqrt(prev_norm);
  double flux = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double a = m[k] / norm;
    const double b = prev_norm > 0.0 ? previous[k] / prev_norm : 0.0;
    flux += (a - b) * (a - b);
  }
  out.flux = std::sqrt(flux);
  return out;
}

StatisticalFeatures statistical_features(std::span<const double> window) {
  StatisticalFeatures out;
  if (window.empty()) throw Error(ErrorCode::kInvalidArgument, "empty window");
  const double n = static_cast<double>(window.size());
  double mean = 0.0, sq = 0.0;
  for (double v : window) {
    mean += v;
    sq += v * v;
  }
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : window) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.mean = mean;
  out.rms = std::sqrt(sq / n);
  // Rounding leaves ~1e-32 * mean^2 of variance on a constant window.
  if (m2 > 0.0 && m2 > 1e-24 * mean * mean) {
    out.variance = m2;
    out.std_dev = std::sqrt(m2);
    out.skewness = m3 / (m2 * out.std_dev);
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

std::vector<std::size_t> find_peaks(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  if (x.size() < 3) return peaks;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double threshold = kPeakProminenceFraction * (*hi - *lo);
  if (!(threshold > 0.0)) return peaks;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (!(x[i - 1] < x[i] && x[i] > x[i + 1])) continue;
    double left_min = x[i];
    for (std::size_t j = i; j-- > 0;) {
      if (x[j] > x[i]) break;
      left_min = std::min(left_min, x[j]);
    }
    double right_min = x[i];
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[j] > x[i]) break;
      right_min = std::min(right_min, x[j]);
    }
    if (x[i] - std::max(left_min, right_min) >= threshold) peaks.push_back(i);
  }
  return peaks;
}

namespace {

double mean_spacing(const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) return 0.0;
  return static_cast<double>(idx.back() - idx.front()) / static_cast<double>(idx.size() - 1);
}

}  // namespace

PeakTroughFeatures peaktrough_features(std::span<const double> window) {
  PeakTroughFeatures out;
  const auto peaks = find_peaks(window);
  std::vector<double> negated(window.size());
  std::transform(window.begin(), window.end(), negated.begin(), [](double v) { return -v; });
  const auto troughs = find_peaks(negated);
  if (!peaks.empty()) {
    double s = 0.0;
    for (auto i : peaks) s += window[i];
    out.peak_amplitude = s / static_cast<double>(peaks.size());
  }
  if (!troughs.empty()) {
    double s = 0.0;
    for (auto i : troughs) s += window[i];
    out.trough_amplitude = s / static_cast<double>(troughs.size());
  }
  out.peak_distance = mean_spacing(peaks);
  out.trough_distance = mean_spacing(troughs);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string taper_name(Taper t) { return t == Taper::kHann ? "hann" : "rectangular"; }

std::string window_step(std::size_t w, const WindowPlan& plan) {
  return "window:" + std::to_string(w) + "[start=" + std::to_string(w * plan.hop) +
         ",len=" + std::to_string(plan.window_len) + "]";
}

std::string stft_step(const ExtractionParams& p) {
  return "transform:stft[fft=" + std::to_string(p.fft_size) + ",taper=" + taper_name(p.taper) +
         "]";
}

}  // namespace

FeatureRow extract_fl1(const Signal& signal, const ExtractionParams& params) {
  FeatureRow row;
  const Signal centered = mean_subtract(signal);
  const std::size_t n = centered.samples.size();

  row.values.reserve(3 * n);
  row.descriptors.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    row.values.push_back(centered.samples[i]);
    row.descriptors.push_back({1, FeatureFamily::kTimeDomain, "L1/td/sample=" + std::to_string(i),
                               {"signal:mean_subtracted", "transform:identity",
                                "sample:" + std::to_string(i)}});
  }

  const auto spectra = stft(centered, params.plan, params.fft_size, params.taper);
  for (const auto& s : spectra) {
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
      row.values.push_back(s.magnitudes[k]);
      row.descriptors.push_back(
          {1, FeatureFamily::kFrequencyDomain,
           "L1/fd/win=" + std::to_string(s.window_index) + "/bin=" + std::to_string(k),
           {"signal:mean_subtracted", window_step(s.window_index, params.plan), stft_step(params),
            "bin:" + std::to_string(k) + "[hz=" +
                detail::format_double(static_cast<double>(k) * s.bin_hz) + "]"}});
    }
  }

  const auto dec = dwt4(centered.samples, params.wavelet);
  const std::string dwt_step = "transform:dwt4[wavelet=" + params.wavelet + ",mode=periodized]";
  auto add_band = [&](const std::vector<double>& band, const std::string& band_name) {
    for (std::size_t i = 0; i < band.size(); ++i) {
      row.values.push_back(band[i]);
      row.descriptors.push_back({1, FeatureFamily::kWavelet,
                                 "L1/dwt/" + band_name + "/coef=" + std::to_string(i),
                                 {"signal:mean_subtracted", dwt_step, "band:" + band_name,
                                  "coefficient:" + std::to_string(i)}});
    }
  };
  for (std::size_t level = 0; level < dec.details.size(); ++level) {
    add_band(dec.details[level], "d" + std::to_string(level + 1));
  }
  add_band(dec.approx, "a" + std::to_string(kDwtLevels));
  return row;
}

FeatureRow extract_fl2(const Signal& signal, const ExtractionParams& params) {
  FeatureRow row;
  const Signal centered = mean_subtract(signal);
  const auto wins = windows(centered, params.plan);
  const auto& kinds = layer2_kind_names();
  row.values.reserve(wins.size() * kLayer2KindCount);
  std::vector<double> previous;
  for (std::size_t w = 0; w < wins.size(); ++w) {
    const auto spectrum =
        window_spectrum(wins[w], centered.fs, params.fft_size, params.taper, w);
    const auto spectral = spectral_features(spectrum, previous).as_array();
    const auto stats = statistical_features(wins[w]).as_array();
    const auto peaks = peaktrough_features(wins[w]).as_array();
    previous = spectrum.magnitudes;

    std::array<double, kLayer2KindCount> all{};
    std::copy(spectral.begin(), spectral.end(), all.begin());
    std::copy(stats.begin(), stats.end(), all.begin() + kSpectralFeatureCount);
    std::copy(peaks.begin(), peaks.end(),
              all.begin() + kSpectralFeatureCount + kStatisticalFeatureCount);
    for (std::size_t j = 0; j < kLayer2KindCount; ++j) {
      const auto family = kind_family(j);
      std::vector<std::string> lineage = {"signal:mean_subtracted", window_step(w, params.plan)};
      if (family == FeatureFamily::kSpectral) {
        lineage.push_back(stft_step(params));
      } else {
        lineage.push_back("transform:time_window");
      }
      lineage.push_back("feature:" + std::string(kinds[j]));
      row.values.push_back(all[j]);
      row.descriptors.push_back({2, family,
                                 "L2/" + std::string(kinds[j]) + "/win=" + std::to_string(w),
                                 std::move(lineage)});
    }
  }
  return row;
}

FeatureRow extract_fl3(const FeatureRow& fl2) {
  if (fl2.values.size() % kLayer2KindCount != 0) {
    throw Error(ErrorCode::kWidthMismatch, "layer-2 fragment is not a whole number of windows");
  }
  const std::size_t wins = fl2.values.size() / kLayer2KindCount;
  const auto& kinds = layer2_kind_names();
  auto value = [&](std::size_t w, std::size_t kind) { return fl2.values[w * kLayer2KindCount + kind]; };

  FeatureRow row;
  row.values.reserve(kLayer3FeatureCount);
  for (std::size_t j = 0; j < kLayer2KindCount; ++j) {
    double mean = 0.0, var = 0.0;
    if (wins > 1) {
      std::vector<double> diff(wins - 1);
      for (std::size_t w = 0; w + 1 < wins; ++w) diff[w] = value(w + 1, j) - value(w, j);
      for (double d : diff) mean += d;
      mean /= static_cast<double>(diff.size());
      for (double d : diff) var += (d - mean) * (d - mean);
      var /= static_cast<double>(diff.size());
    }
    const std::string source = "source:L2/" + std::string(kinds[j]) + "/win=*";
    row.values.push_back(mean);
    row.descriptors.push_back({3, FeatureFamily::kDerivative,
                               "L3/" + std::string(kinds[j]) + "/diff_mean",
                               {source, "transform:first_difference[across=windows]",
                                "aggregate:mean"}});
    row.values.push_back(std::sqrt(var));
    row.descriptors.push_back({3, FeatureFamily::kDerivative,
                               "L3/" + std::string(kinds[j]) + "/diff_std",
                               {source, "transform:first_difference[across=windows]",
                                "aggregate:std"}});
  }
  for (const auto& [a, b] : layer3_ratio_pairs()) {
    double sum = 0.0;
    for (std::size_t w = 0; w < wins; ++w) {
      const double den = value(w, b);
      if (std::abs(den) >= 1e-12) sum += value(w, a) / den;
    }
    const double mean = wins > 0 ? sum / static_cast<double>(wins) : 0.0;
    row.values.push_back(mean);
    row.descriptors.push_back(
        {3, FeatureFamily::kRatio,
         "L3/ratio/" + std::string(kinds[a]) + ":" + std::string(kinds[b]) + "/mean",
         {"numerator:L2/" + std::string(kinds[a]) + "/win=*",
          "denominator:L2/" + std::string(kinds[b]) + "/win=*",
          "transform:guarded_ratio[min_denominator=1e-12]", "aggregate:mean"}});
  }
  return row;
}

// ---------------------------------------------------------------------------

namespace {

std::string grouped(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

}  // namespace

FeatureBudget feature_budget(std::uint64_t n, double fs, std::size_t fft_size) {
  FeatureBudget b;
  b.n = n;
  b.fs = fs;
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw Error(ErrorCode::kInvalidArgument, "sampling rate fs must be positive");
  }
  if (!is_power_of_two(fft_size)) throw Error(ErrorCode::kInvalidArgument, "fft_size must be a power of two");
  if (n == 0) return b;
  const WindowPlan plan = WindowPlan::for_rate(fs);
  b.windows = window_count(static_cast<std::size_t>(n), plan);
  b.td = n;
  b.fd = b.windows * (fft_size / 2);
  for (auto s : dwt4_band_sizes(static_cast<std::size_t>(n))) b.dwt += s;
  b.l1_count = b.td + b.fd + b.dwt;
  b.l2_count = b.windows * kLayer2KindCount;
  b.l3_count = b.windows > 0 ? kLayer3FeatureCount : 0;
  b.total = b.l1_count + b.l2_count + b.l3_count;

  b.l1_approx = 3 * n;
  b.l2_approx = 120 * n;
  b.l3_approx = 480 * n;
  b.cumulative_l2_approx = 123 * n;
  b.total_approx = 600 * n;
  return b;
}

std::string FeatureBudget::describe() const {
  std::ostringstream os;
  os << "feature budget for n=" << n << ", fs=" << detail::format_double(fs) << "\n";
  os << "windows (1 s, 50% overlap): " << windows << "\n";
  os << "exact counts:\n";
  os << "  layer 1: " << l1_count << " (TD " << td << " + FD " << fd << " + DWT " << dwt << ")\n";
  os << "  layer 2: " << l2_count << " (20 per window)\n";
  os << "  layer 3: " << l3_count << " (40 derivative + 10 ratio)\n";
  os << "  total:   " << total << "\n";
  os << "approximate counts:\n";
  os << "  layer 1: 3n = " << l1_approx << "\n";
  os << "  layer 2: 120n = " << l2_approx << "; cumulative 3n+120n = 123n = "
     << cumulative_l2_approx << "\n";
  os << "  layer 3: 480n = " << l3_approx << "; cumulative 123n+480n ~ 600n = " << total_approx
     << "\n";
  os << "  total:   600n = " << total_approx << " (" << grouped(total_approx) << ")\n";
  os << "note: a second derivation of the same totals (16n after layer 2, 30n after layer 3) "
        "gives 30n = "
     << grouped(30 * n) << ", which disagrees with 600n = " << grouped(total_approx)
     << "; the 600n step-by-step figure is reported above.\n";
  return os.str();
}

// ---------------------------------------------------------------------------

FeatureMatrix extract_matrix(std::span<const Signal> signals, const ExtractionParams& params,
                             std::span<const int> layers, unsigned jobs) {
  if (signals.empty()) throw Error(ErrorCode::kInvalidArgument, "no signals to extract");
  bool want[4] = {false, false, false, false};
  for (int l : layers) {
    if (l < 1 || l > 3) throw Error(ErrorCode::kInvalidArgument, "layer must be 1, 2 or 3");
    want[l] = true;
  }
  const std::size_t n = signals.front().samples.size();
  for (const auto& s : signals) {
    if (s.samples.size() != n) {
      throw Error(ErrorCode::kLengthMismatch, s.source_id + " has " +
                                                  std::to_string(s.samples.size()) +
                                                  " samples, expected " + std::to_string(n));
    }
  }

  std::vector<FeatureRow> rows(signals.size());
  parallel_for(signals.size(), jobs, [&](std::size_t i) {
    FeatureRow row;
    if (want[1]) row.append(extract_fl1(signals[i], params));
    if (want[2] || want[3]) {
      FeatureRow l2 = extract_fl2(signals[i], params);
      FeatureRow l3;
      if (want[3]) l3 = extract_fl3(l2);
      if (want[2]) row.append(std::move(l2));
      if (want[3]) row.append(std::move(l3));
    }
    // Descriptors are identical across rows; keep only the first copy.
    if (i != 0) row.descriptors.clear();
    rows[i] = std::move(row);
  });

  FeatureMatrix m;
  const std::size_t width = rows.front().values.size();
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
    }
    m.labels.push_back(signals[i].label);
  }
  m.descriptors = std::move(rows.front().descriptors);
  return m;
}

void write_feature_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& d : matrix.descriptors) out << d.name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      out << detail::format_double(
                 matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << ',';
    }
    out << matrix.labels[i] << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, "missing header", 1);
  auto header = detail::split(detail::trim(line), ',');
  if (header.empty() || header.back() != "label") {
    throw Error(ErrorCode::kMalformedRow, "last column must be 'label'", 1);
  }
  FeatureMatrix m;
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    FeatureDescriptor d;
    d.name = std::string(header[j]);
    if (d.name.size() > 2 && d.name[0] == 'L' && d.name[1] >= '1' && d.name[1] <= '3') {
      d.layer = d.name[1] - '0';
    }
    d.lineage = {"column:" + d.name};
    m.descriptors.push_back(std::move(d));
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::trim(line);
    if (text.empty()) continue;
    auto fields = detail::split(text, ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRow, "expected " + std::to_string(header.size()) + " fields",
                  line_no);
    }
    std::vector<double> row;
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
      auto v = detail::parse_double(fields[j]);
      if (!v) throw Error(ErrorCode::kMalformedRow, "non-numeric value", line_no);
      row.push_back(*v);
    }
    auto label = detail::parse_int(fields.back());
    if (!label) throw Error(ErrorCode::kMalformedRow, "non-integer label", line_no);
    m.labels.push_back(static_cast<int>(*label));
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.descriptors.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_descriptor_sidecar(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& d : matrix.descriptors) {
    records.push_back({{"name", d.name},
                       {"layer", d.layer},
                       {"family", std::string(to_string(d.family))},
                       {"lineage", d.lineage}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << records.dump(1) << '\n';
}

std::vector<FeatureDescriptor> read_descriptor_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<FeatureDescriptor> out;
  try {
    auto records = nlohmann::json::parse(in);
    for (const auto& r : records) {
      FeatureDescriptor d;
      d.name = r.at("name").get<std::string>();
      d.layer = r.at("layer").get<int>();
      d.family = family_from_string(r.at("family").get<std::string>());
      d.lineage = r.at("lineage").get<std::vector<std::string>>();
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace featforge
