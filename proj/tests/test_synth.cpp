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

#include <cmath>
#include <filesystem>

#include "featforge/error.hpp"
#include "featforge/synth.hpp"
#include "featforge/transforms.hpp"
#include "test_util.hpp"

using namespace featforge;
using fftest::error_code;

namespace {

SynthSpec spec_for(const std::string& recipe, std::uint64_t seed, std::size_t instances = 0) {
  SynthSpec s;
  s.recipe = recipe;
  s.seed = seed;
  s.instances = instances;
  return s;
}

// Class-averaged periodogram of the full-length signals.
std::vector<double> mean_power(const SynthDataset& d, int label, std::size_t fft) {
  std::vector<double> acc(fft / 2, 0.0);
  std::size_t count = 0;
  for (const auto& s : d.signals) {
    if (s.label != label) continue;
    const auto x = window_transform(s.samples, fft, Taper::kRectangular);
    for (std::size_t k = 0; k < fft / 2; ++k) acc[k] += std::norm(x[k]);
    ++count;
  }
  for (double& v : acc) v /= static_cast<double>(count);
  return acc;
}

}  // namespace

TEST_CASE("recipe defaults") {
  CHECK(synth_recipes().size() == 5);
  const auto bearing = spec_for("bearing-like", 1).resolved();
  CHECK(bearing.n == 20480);
  CHECK(bearing.fs == 20000.0);
  CHECK(spec_for("ppg-like", 1).resolved().fs == 60.0);
  CHECK(is_tabular_recipe("xor-features"));
  CHECK_FALSE(is_tabular_recipe("peak-rhythm"));
}

TEST_CASE("spec validation") {
  CHECK(error_code([] { spec_for("noise-wave", 1).validate(); }) == ErrorCode::kInvalidSpec);
  CHECK(error_code([] { spec_for("spectral-band", 1, 1).validate(); }) == ErrorCode::kInvalidSpec);
  auto s = spec_for("spectral-band", 1);
  s.fs = -3.0;
  CHECK(error_code([&] { s.validate(); }) == ErrorCode::kInvalidSpec);
  s = spec_for("spectral-band", 1);
  s.n = 4;
  CHECK(error_code([&] { s.validate(); }) == ErrorCode::kInvalidSpec);
}

TEST_CASE("generated datasets are byte-identical under a seed") {
  fftest::TempDir a, b, c;
  auto s = spec_for("ppg-like", 9, 3);
  const auto ma = generate(s, a.path());
  generate(s, b.path(), 4);
  s.seed = 10;
  generate(s, c.path());
  CHECK(ma.entries.size() == 6);
  CHECK(ma.fs == 60.0);
  bool any_diff = false;
  for (const auto& e : ma.entries) {
    const auto text = fftest::read_text(a / e.path);
    CHECK(!text.empty());
    CHECK(text == fftest::read_text(b / e.path));
    any_diff = any_diff || text != fftest::read_text(c / e.path);
  }
  CHECK(any_diff);
  CHECK(fftest::read_text(a / "manifest.csv") == fftest::read_text(b / "manifest.csv"));
  const auto loaded = load_manifest(a / "manifest.csv");
  CHECK(loaded.label_names == std::vector<std::string>{"low", "high"});
  CHECK(loaded.name == "ppg-like-seed9");
}

TEST_CASE("signals do not depend on the worker count") {
  const auto s = spec_for("bearing-like", 2, 3);
  const auto one = generate_signals(s, 1);
  const auto many = generate_signals(s, 4);
  REQUIRE(one.signals.size() == many.signals.size());
  for (std::size_t i = 0; i < one.signals.size(); ++i) {
    CHECK(one.signals[i].samples == many.signals[i].samples);
    CHECK(one.signals[i].label == (i < 3 ? 0 : 1));
  }
}

TEST_CASE("spectral-band classes differ in one bin by at least ten times") {
  const auto s = spec_for("spectral-band", 3, 40);
  const auto d = generate_signals(s);
  const auto r = s.resolved();
  const std::size_t fft = r.n;
  const auto p0 = mean_power(d, 0, fft);
  const auto p1 = mean_power(d, 1, fft);
  const auto tone_bin = static_cast<std::size_t>(std::lround(spectral_band_tone_hz(r.fs) * fft / r.fs));
  CHECK(p1[tone_bin] >= 10.0 * p0[tone_bin]);
  // Away from the tone the two classes share the same noise floor.
  double other0 = 0.0, other1 = 0.0;
  for (std::size_t k = 1; k < fft / 2; ++k) {
    if (k == tone_bin) continue;
    other0 += p0[k];
    other1 += p1[k];
  }
  CHECK(other1 == doctest::Approx(other0).epsilon(0.05));
}

TEST_CASE("peak-rhythm classes share their average spectrum") {
  const auto s = spec_for("peak-rhythm", 4, 40);
  const auto d = generate_signals(s);
  const std::size_t fft = s.resolved().n;
  const auto p0 = mean_power(d, 0, fft);
  const auto p1 = mean_power(d, 1, fft);
  // Compare in 16 coarse bands to average out periodogram scatter.
  const std::size_t band = fft / 2 / 16;
  for (std::size_t b = 0; b < 16; ++b) {
    double e0 = 0.0, e1 = 0.0;
    for (std::size_t k = b * band; k < (b + 1) * band; ++k) {
      e0 += p0[k];
      e1 += p1[k];
    }
    CHECK(e1 == doctest::Approx(e0).epsilon(0.35));
  }
}

TEST_CASE("xor-features table") {
  const auto m = generate_xor_features(50, 5);
  CHECK(m.rows() == 100);
  CHECK(m.cols() == 8);
  CHECK(m.descriptors[0].name == "parity0");
  CHECK(m.descriptors[1].name == "parity1");
  CHECK_NOTHROW(m.validate());
  std::size_t ones = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto a = static_cast<int>(m.values(static_cast<Eigen::Index>(r), 0));
    const auto b = static_cast<int>(m.values(static_cast<Eigen::Index>(r), 1));
    CHECK(m.labels[r] == (a ^ b));
    ones += static_cast<std::size_t>(m.labels[r]);
  }
  CHECK(ones == 50);
  CHECK(generate_xor_features(50, 5).values == m.values);
  CHECK(generate_xor_features(50, 6).values != m.values);
}

TEST_CASE("tabular recipes write a feature table") {
  fftest::TempDir dir;
  auto s = spec_for("xor-features", 1, 10);
  CHECK(error_code([&] { generate(s, dir.path()); }) == ErrorCode::kInvalidSpec);
}
