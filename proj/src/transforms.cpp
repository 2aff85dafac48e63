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

#include "featforge/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "featforge/error.hpp"

namespace featforge {

namespace {
#include "wavelet_filters.inc"
}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::kInvalidArgument, "FFT size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep
        // rounding error independent of the transform length.
        const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                     std::sin(angle * static_cast<double>(k)));
        auto u = data[i + k];
        auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> window_transform(std::span<const double> window,
                                                   std::size_t fft_size, Taper taper) {
  if (!is_power_of_two(fft_size)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fft_size must be a power of two (got " + std::to_string(fft_size) + ")");
  }
  const std::size_t m = std::min(window.size(), fft_size);
  std::vector<double> w(m, 1.0);
  if (taper == Taper::kHann && m > 1) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(m - 1)));
      sum += w[i];
    }
    // Unit-mean taper keeps amplitudes comparable with the rectangular mode.
    const double scale = static_cast<double>(m) / sum;
    for (double& v : w) v *= scale;
  }
  std::vector<std::complex<double>> data(fft_size);
  for (std::size_t i = 0; i < m; ++i) data[i] = window[i] * w[i];
  fft_inplace(data);
  return data;
}

Spectrum window_spectrum(std::span<const double> window, double fs, std::size_t fft_size,
                         Taper taper, std::size_t window_index) {
  auto full = window_transform(window, fft_size, taper);
  Spectrum s;
  s.bin_hz = fs / static_cast<double>(fft_size);
  s.window_index = window_index;
  s.magnitudes.resize(fft_size / 2);
  for (std::size_t k = 0; k < fft_size / 2; ++k) s.magnitudes[k] = std::abs(full[k]);
  return s;
}

std::vector<Spectrum> stft(const Signal& signal, const WindowPlan& plan, std::size_t fft_size,
                           Taper taper) {
  auto wins = windows(signal, plan);
  std::vector<Spectrum> out;
  out.reserve(wins.size());
  for (std::size_t i = 0; i < wins.size(); ++i) {
    out.push_back(window_spectrum(wins[i], signal.fs, fft_size, taper, i));
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& wavelet_candidates() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : filter_table()) v.emplace_back(e.id);
    return v;
  }();
  return ids;
}

std::span<const double> wavelet_filter(std::string_view wavelet_id) {
  for (const auto& e : filter_table()) {
    if (wavelet_id == e.id) return e.taps;
  }
  throw Error(ErrorCode::kUnknownWavelet, "'" + std::string(wavelet_id) + "'");
}

std::size_t WaveletDecomposition::coefficient_count() const {
  std::size_t n = approx.size();
  for (const auto& d : details) n += d.size();
  return n;
}

std::vector<std::size_t> dwt4_band_sizes(std::size_t n) {
  std::vector<std::size_t> sizes;
  std::size_t len = n;
  for (int level = 0; level < kDwtLevels; ++level) {
    len = (len + 1) / 2;
    sizes.push_back(len);
  }
  sizes.push_back(len);
  return sizes;
}

namespace {

// One periodized analysis step. Odd inputs are extended by repeating the last
// sample so the transform stays orthogonal on an even-length circle.
void analysis_step(std::span<const double> x, std::span<const double> lo,
                   std::vector<double>& approx, std::vector<double>& detail) {
  std::vector<double> ext(x.begin(), x.end());
  if (ext.size() % 2 == 1) ext.push_back(ext.back());
  const std::size_t n = ext.size();
  const std::size_t half = n / 2;
  const std::size_t taps = lo.size();
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const double v = ext[(2 * k + j) % n];
      const double hi = (j % 2 == 0 ? 1.0 : -1.0) * lo[taps - 1 - j];
      a += lo[j] * v;
      d += hi * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   std::span<const double> lo, std::size_t out_len) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  const std::size_t taps = lo.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t j = 0; j < taps; ++j) {
      const double hi = (j % 2 == 0 ? 1.0 : -1.0) * lo[taps - 1 - j];
      x[(2 * k + j) % n] += lo[j] * approx[k] + hi * detail[k];
    }
  }
  x.resize(out_len);
  return x;
}

}  // namespace

WaveletDecomposition dwt4(std::span<const double> samples, std::string_view wavelet_id) {
  auto lo = wavelet_filter(wavelet_id);
  if (samples.size() < lo.size()) {
    throw Error(ErrorCode::kSignalTooShort,
                std::to_string(samples.size()) + " samples for " + std::string(wavelet_id) +
                    " (filter length " + std::to_string(lo.size()) + ")");
  }
  WaveletDecomposition dec;
  dec.wavelet_id = std::string(wavelet_id);
  std::vector<double> current(samples.begin(), samples.end());
  for (int level = 0; level < kDwtLevels; ++level) {
    std::vector<double> a;
    std::vector<double> d;
    analysis_step(current, lo, a, d);
    dec.details.push_back(std::move(d));
    current = std::move(a);
  }
  dec.approx = std::move(current);
  return dec;
}

std::vector<double> idwt4(const WaveletDecomposition& dec, std::size_t original_len) {
  auto lo = wavelet_filter(dec.wavelet_id);
  const auto sizes = dwt4_band_sizes(original_len);
  if (dec.levels != kDwtLevels || dec.details.size() != kDwtLevels ||
      dec.approx.size() != sizes[kDwtLevels]) {
    throw Error(ErrorCode::kLengthMismatch, "approximation band does not match length " +
                                                std::to_string(original_len));
  }
  for (int level = 0; level < kDwtLevels; ++level) {
    if (dec.details[level].size() != sizes[level]) {
      throw Error(ErrorCode::kLengthMismatch,
                  "detail level " + std::to_string(level + 1) + " has " +
                      std::to_string(dec.details[level].size()) + " coefficients, expected " +
                      std::to_string(sizes[level]));
    }
  }
  // Input length at each level: original_len, sizes[0], sizes[1], sizes[2].
  std::vector<double> current = dec.approx;
  for (int level = kDwtLevels - 1; level >= 0; --level) {
    const std::size_t out_len = level == 0 ? original_len : sizes[level - 1];
    current = synthesis_step(current, dec.details[level], lo, out_len);
  }
  return current;
}

WaveletScore energy_entropy_ratio(std::span<const double> coefficients) {
  WaveletScore score;
  double energy = 0.0;
  for (double c : coefficients) energy += c * c;
  if (!(energy > 0.0)) throw Error(ErrorCode::kZeroEnergy, "all coefficients are zero");
  double entropy = 0.0;
  for (double c : coefficients) {
    const double p = c * c / energy;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  entropy = std::max(entropy, 0.0);
  score.energy = energy;
  score.entropy = entropy;
  score.ratio = entropy > 0.0 ? energy / entropy : std::numeric_limits<double>::infinity();
  return score;
}

WaveletScore energy_entropy_ratio(const WaveletDecomposition& dec) {
  std::vector<double> pooled;
  pooled.reserve(dec.coefficient_count());
  for (const auto& d : dec.details) pooled.insert(pooled.end(), d.begin(), d.end());
  pooled.insert(pooled.end(), dec.approx.begin(), dec.approx.end());
  auto score = energy_entropy_ratio(pooled);
  score.wavelet_id = dec.wavelet_id;
  return score;
}

std::string select_mother_wavelet(std::span<const double> samples,
                                  std::span<const std::string> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no wavelet candidates");
  const std::string* best = nullptr;
  double best_ratio = 0.0;
  for (const auto& id : candidates) {
    WaveletScore s;
    try {
      s = energy_entropy_ratio(dwt4(samples, id));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnknownWavelet) throw;
      continue;
    }
    if (best == nullptr) {
      best = &id;
      best_ratio = s.ratio;
      continue;
    }
    const bool both_inf = std::isinf(s.ratio) && std::isinf(best_ratio);
    const bool better = !both_inf && s.ratio > best_ratio &&
                        (std::isinf(s.ratio) ||
                         s.ratio - best_ratio > kWaveletTieTolerance * std::abs(best_ratio));
    if (better) {
      best = &id;
      best_ratio = s.ratio;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::kAllCandidatesFailed,
                "no candidate wavelet could decompose a " + std::to_string(samples.size()) +
                    "-sample signal");
  }
  return *best;
}

}  // namespace featforge
