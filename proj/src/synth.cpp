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

#include "featforge/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "featforge/error.hpp"
#include "featforge/parallel.hpp"
#include "featforge/random.hpp"

namespace featforge {

namespace {

constexpr double kPi = std::numbers::pi;

struct RecipeDefaults {
  const char* name;
  std::size_t instances;
  std::size_t n;
  double fs;
  double noise_sigma;
  const char* label0;
  const char* label1;
};

const std::vector<RecipeDefaults>& recipe_table() {
  static const std::vector<RecipeDefaults> table = {
      {"bearing-like", 20, 20480, 20000.0, 1.0, "good", "faulty"},
      {"ppg-like", 30, 1800, 60.0, 0.05, "low", "high"},
      {"spectral-band", 100, 1024, 256.0, 1.0, "absent", "present"},
      {"peak-rhythm", 50, 2048, 256.0, 0.1, "dense", "sparse"},
      {"xor-features", 100, 8, 1.0, 1.0, "even", "odd"},
  };
  return table;
}

const RecipeDefaults& defaults_for(const std::string& recipe) {
  for (const auto& r : recipe_table()) {
    if (recipe == r.name) return r;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown recipe '" + recipe + "'");
}

// Bearing-like: broadband noise; the faulty class adds decaying resonance
// bursts at a fixed repetition rate, with severity growing over the class.
void bearing_like(std::vector<double>& x, double fs, double sigma, int label, double severity,
                  Rng& rng) {
  for (auto& v : x) v = rng.normal(0.0, sigma);
  if (label == 0) return;
  const double repeat_hz = 236.4;
  const double resonance_hz = 3000.0;
  const double decay = 1.0 / (0.0008 * fs);  // ~0.8 ms time constant
  const double amplitude = sigma * (1.0 + 2.0 * severity);
  const double period = fs / repeat_hz;
  double t0 = rng.uniform(0.0, period);
  while (t0 < static_cast<double>(x.size())) {
    const double jitter = rng.normal(0.0, 0.01 * period);
    const double start = t0 + jitter;
    const double gain = amplitude * rng.uniform(0.7, 1.3);
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(start)));
    const auto span = static_cast<std::size_t>(8.0 / decay);
    for (std::size_t i = first; i < x.size() && i < first + span; ++i) {
      const double dt = static_cast<double>(i) - start;
      x[i] += gain * std::exp(-decay * dt) * std::sin(2.0 * kPi * resonance_hz * dt / fs);
    }
    t0 += period;
  }
}

// PPG-like: pulse trains; class 1 has a sharper, earlier systolic peak and a
// weaker diastolic wave.
void ppg_like(std::vector<double>& x, double fs, double sigma, int label, Rng& rng) {
  const double rate_hz = rng.uniform(1.0, 1.5);
  const double sys_width = label == 0 ? 0.10 : 0.06;
  const double dia_amp = label == 0 ? 0.45 : 0.15;
  const double dia_delay = label == 0 ? 0.30 : 0.25;
  const double wander_hz = rng.uniform(0.05, 0.2);
  const double wander_phase = rng.uniform(0.0, 2.0 * kPi);
  std::fill(x.begin(), x.end(), 0.0);
  const double duration = static_cast<double>(x.size()) / fs;
  double beat = rng.uniform(0.0, 1.0 / rate_hz);
  while (beat < duration + 1.0) {
    const double amp = rng.uniform(0.9, 1.1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = static_cast<double>(i) / fs - beat;
      if (t < -0.5 || t > 1.0) continue;
      const double s = (t - 0.12) / sys_width;
      const double d = (t - dia_delay) / 0.1;
      x[i] += amp * (std::exp(-0.5 * s * s) + dia_amp * std::exp(-0.5 * d * d));
    }
    beat += (1.0 / rate_hz) * rng.uniform(0.97, 1.03);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] += 0.1 * std::sin(2.0 * kPi * wander_hz * t + wander_phase) + rng.normal(0.0, sigma);
  }
}

// Spectral-band: unit Gaussian noise; class 1 adds one bin-centered tone.
void spectral_band(std::vector<double>& x, double fs, double sigma, int label, Rng& rng) {
  const double tone = spectral_band_tone_hz(fs);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal(0.0, sigma);
    if (label == 1) x[i] += std::sin(2.0 * kPi * tone * static_cast<double>(i) / fs + phase);
  }
}

// Peak-rhythm: both classes are the same pulse shape driven by random
// excitation with equal expected power spectrum. Class 0 is driven by
// Gaussian white noise (peaks at every oscillation), class 1 by sparse
// random-sign arrivals (peaks cluster in bursts with irregular gaps).
void peak_rhythm(std::vector<double>& x, double sigma, int label, Rng& rng) {
  constexpr std::size_t kPulseLen = 16;
  constexpr double kDensity = 0.15;
  std::array<double, kPulseLen> h{};
  double energy = 0.0;
  for (std::size_t t = 0; t < kPulseLen; ++t) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(t + 1) / (kPulseLen + 1));
    h[t] = w * std::sin(2.0 * kPi * 0.25 * static_cast<double>(t));
    energy += h[t] * h[t];
  }
  for (auto& v : h) v /= std::sqrt(energy);

  const std::size_t n = x.size();
  std::vector<double> drive(n + kPulseLen, 0.0);
  for (auto& d : drive) {
    if (label == 0) {
      d = rng.normal();
    } else {
      const double u = rng.uniform();
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      d = u < kDensity ? sign / std::sqrt(kDensity) : 0.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < kPulseLen; ++t) acc += h[t] * drive[i + kPulseLen - t];
    x[i] = acc + rng.normal(0.0, sigma);
  }
}

std::string file_name(std::size_t index) {
  std::ostringstream name;
  name << "sig_" << std::setw(5) << std::setfill('0') << index << ".txt";
  return name.str();
}

}  // namespace

const std::vector<std::string>& synth_recipes() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& r : recipe_table()) out.emplace_back(r.name);
    return out;
  }();
  return names;
}

bool is_tabular_recipe(const std::string& recipe) { return recipe == "xor-features"; }

double spectral_band_tone_hz(double fs) { return fs / 8.0; }

SynthSpec SynthSpec::resolved() const {
  const auto& d = defaults_for(recipe);
  SynthSpec out = *this;
  if (out.instances == 0) out.instances = d.instances;
  if (out.n == 0) out.n = d.n;
  if (out.fs == 0.0) out.fs = d.fs;
  if (out.noise_sigma < 0.0) out.noise_sigma = d.noise_sigma;
  return out;
}

void SynthSpec::validate() const {
  defaults_for(recipe);
  const SynthSpec r = resolved();
  if (r.instances < 2) throw Error(ErrorCode::kInvalidSpec, "need at least 2 instances per class");
  if (!(r.fs > 0.0) || !std::isfinite(r.fs)) throw Error(ErrorCode::kInvalidSpec, "fs must be positive");
  if (!(r.noise_sigma >= 0.0) || !std::isfinite(r.noise_sigma)) {
    throw Error(ErrorCode::kInvalidSpec, "noise_sigma must be non-negative");
  }
  if (r.n < 16 && !is_tabular_recipe(recipe)) {
    throw Error(ErrorCode::kInvalidSpec, "signals need at least 16 samples");
  }
}

SynthDataset generate_signals(const SynthSpec& spec, unsigned jobs) {
  spec.validate();
  if (is_tabular_recipe(spec.recipe)) {
    throw Error(ErrorCode::kInvalidSpec,
                "recipe '" + spec.recipe + "' is tabular; it produces a feature matrix");
  }
  const SynthSpec r = spec.resolved();
  const auto& d = defaults_for(r.recipe);
  SynthDataset out;
  out.label_names = {d.label0, d.label1};
  const std::size_t total = 2 * r.instances;
  out.signals.resize(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    Rng rng(r.seed, i + 1);
    Signal& s = out.signals[i];
    s.label = i < r.instances ? 0 : 1;
    s.fs = r.fs;
    s.source_id = file_name(i);
    s.samples.assign(r.n, 0.0);
    if (r.recipe == "bearing-like") {
      const double severity = r.instances > 1 ? static_cast<double>(i % r.instances) /
                                                    static_cast<double>(r.instances - 1)
                                              : 1.0;
      bearing_like(s.samples, r.fs, r.noise_sigma, s.label, severity, rng);
    } else if (r.recipe == "ppg-like") {
      ppg_like(s.samples, r.fs, r.noise_sigma, s.label, rng);
    } else if (r.recipe == "spectral-band") {
      spectral_band(s.samples, r.fs, r.noise_sigma, s.label, rng);
    } else {
      peak_rhythm(s.samples, r.noise_sigma, s.label, rng);
    }
  });
  return out;
}

DatasetManifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir,
                         unsigned jobs) {
  const SynthDataset data = generate_signals(spec, jobs);
  const SynthSpec r = spec.resolved();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  DatasetManifest manifest;
  manifest.label_names = data.label_names;
  manifest.fs = r.fs;
  manifest.name = r.recipe + "-seed" + std::to_string(r.seed);
  manifest.base_dir = out_dir;
  parallel_for(data.signals.size(), jobs, [&](std::size_t i) {
    save_signal(data.signals[i], out_dir / data.signals[i].source_id);
  });
  for (const auto& s : data.signals) manifest.entries.push_back({s.source_id, s.label});
  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

FeatureMatrix generate_xor_features(std::size_t rows_per_class, std::uint64_t seed) {
  if (rows_per_class < 2) throw Error(ErrorCode::kInvalidSpec, "need at least 2 rows per class");
  Rng rng(seed, 0x70B);
  const std::size_t rows = 2 * rows_per_class;
  constexpr std::size_t kCols = 8;
  FeatureMatrix m;
  m.values.resize(static_cast<Eigen::Index>(rows), kCols);
  m.labels.resize(rows);
  // Balanced labels: each label gets its rows_per_class, bit patterns drawn
  // uniformly among the two patterns producing that label.
  std::vector<int> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) labels[i] = i < rows_per_class ? 0 : 1;
  rng.shuffle(labels);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int a = rng.uniform() < 0.5 ? 0 : 1;
    const int b = a ^ labels[i];
    m.values(r, 0) = a;
    m.values(r, 1) = b;
    for (Eigen::Index c = 2; c < static_cast<Eigen::Index>(kCols); ++c) m.values(r, c) = rng.normal();
    m.labels[i] = labels[i];
  }
  for (std::size_t c = 0; c < kCols; ++c) {
    FeatureDescriptor d;
    d.layer = 1;
    d.family = FeatureFamily::kTimeDomain;
    d.name = c < 2 ? "parity" + std::to_string(c) : "noise" + std::to_string(c - 2);
    d.lineage = {"recipe:xor-features", "column:" + std::to_string(c)};
    m.descriptors.push_back(std::move(d));
  }
  return m;
}

}  // namespace featforge
