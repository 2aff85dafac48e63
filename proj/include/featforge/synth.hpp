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
#include <string>
#include <vector>

#include "featforge/feature_bank.hpp"
#include "featforge/signal_io.hpp"

namespace featforge {

/// Parameters of a synthetic dataset. Zero (or negative sigma) means "use the
/// recipe default".
struct SynthSpec {
  std::string recipe = "spectral-band";
  std::size_t instances = 0;  // per class
  std::size_t n = 0;
  double fs = 0.0;
  double noise_sigma = -1.0;
  std::uint64_t seed = 0;

  /// Copy with recipe defaults filled in.
  SynthSpec resolved() const;
  void validate() const;
};

/// bearing-like, ppg-like, spectral-band, peak-rhythm, xor-features.
const std::vector<std::string>& synth_recipes();
bool is_tabular_recipe(const std::string& recipe);

struct SynthDataset {
  std::vector<Signal> signals;  // class 0 block first, then class 1
  std::vector<std::string> label_names;
};

/// Signal i draws from its own substream, so output is independent of `jobs`.
SynthDataset generate_signals(const SynthSpec& spec, unsigned jobs = 1);

/// Writes one file per signal plus `manifest.csv` into `out_dir`.
DatasetManifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir,
                         unsigned jobs = 1);

/// Columns 0 and 1 are fair bits whose XOR is the label; columns 2..7 are
/// standard normal noise. `rows_per_class` rows carry each label.
FeatureMatrix generate_xor_features(std::size_t rows_per_class, std::uint64_t seed);

/// Centered frequency of the spectral-band tone, in Hz, for a given rate.
double spectral_band_tone_hz(double fs);

}  // namespace featforge
