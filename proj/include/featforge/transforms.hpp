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

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featforge/signal_io.hpp"

namespace featforge {

enum class Taper { kHann, kRectangular };

/// One-sided magnitude spectrum of a single window: fft_size/2 bins, DC
/// included, Nyquist dropped.
struct Spectrum {
  std::vector<double> magnitudes;
  double bin_hz = 0.0;
  std::size_t window_index = 0;
};

/// In-place radix-2 FFT; data.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

bool is_power_of_two(std::size_t n) noexcept;

/// Full two-sided transform of one window after tapering and fitting to
/// fft_size. Windows longer than fft_size keep their first fft_size samples.
std::vector<std::complex<double>> window_transform(std::span<const double> window,
                                                   std::size_t fft_size, Taper taper);

Spectrum window_spectrum(std::span<const double> window, double fs, std::size_t fft_size,
                         Taper taper, std::size_t window_index = 0);

std::vector<Spectrum> stft(const Signal& signal, const WindowPlan& plan,
                           std::size_t fft_size = 256, Taper taper = Taper::kHann);

// ---------------------------------------------------------------------------
// Discrete wavelet transform

inline constexpr int kDwtLevels = 4;

/// Orthogonal wavelets available for the DWT layer, in preference order.
const std::vector<std::string>& wavelet_candidates();

/// Decomposition low-pass filter for `wavelet_id`; throws UnknownWavelet.
std::span<const double> wavelet_filter(std::string_view wavelet_id);

/// Four-level periodized Mallat decomposition. details[0] is level 1 (finest).
struct WaveletDecomposition {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;
  std::string wavelet_id;
  int levels = kDwtLevels;

  std::size_t coefficient_count() const;
};

/// Coefficient count of each band for a length-n input: ceil-halving per level.
/// Returned as {d1, d2, d3, d4, a4}.
std::vector<std::size_t> dwt4_band_sizes(std::size_t n);

WaveletDecomposition dwt4(std::span<const double> samples, std::string_view wavelet_id);
std::vector<double> idwt4(const WaveletDecomposition& dec, std::size_t original_len);

struct WaveletScore {
  std::string wavelet_id;
  double energy = 0.0;
  double entropy = 0.0;
  double ratio = 0.0;  // +infinity when entropy is zero and energy positive
};

/// Energy / Shannon entropy (nats) of the pooled coefficient-energy
/// distribution. Throws ZeroEnergy when every coefficient is zero.
WaveletScore energy_entropy_ratio(std::span<const double> coefficients);
WaveletScore energy_entropy_ratio(const WaveletDecomposition& dec);

/// Relative tolerance under which two wavelet scores count as tied; ties go
/// to the earlier candidate.
inline constexpr double kWaveletTieTolerance = 1e-9;

/// Argmax of the energy-to-entropy ratio over `candidates`. Candidates whose
/// decomposition or score fails are skipped.
std::string select_mother_wavelet(std::span<const double> samples,
                                  std::span<const std::string> candidates);

}  // namespace featforge
