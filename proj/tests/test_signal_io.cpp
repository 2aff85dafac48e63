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
#include <numeric>

#include "featforge/error.hpp"
#include "featforge/signal_io.hpp"
#include "test_util.hpp"

using namespace featforge;
using fftest::error_code;
using fftest::TempDir;
using fftest::write_text;

TEST_CASE("manifest labels map to ids in order of first appearance") {
  TempDir dir;
  write_text(dir / "m.csv", "path,label\na.txt,good\nb.txt,bad\nc.txt,good\n");
  const auto m = load_manifest(dir / "m.csv");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].label == 0);
  CHECK(m.entries[1].label == 1);
  CHECK(m.entries[2].label == 0);
  CHECK(m.label_names == std::vector<std::string>{"good", "bad"});
  CHECK(m.fs == 0.0);
  CHECK(m.resolve(m.entries[1]) == dir.path() / "b.txt");
}

TEST_CASE("manifest directives and comments") {
  TempDir dir;
  write_text(dir / "m.csv", "# fs=256\n# name=demo\npath,label\n# skipped\nx.txt,a\ny.txt,b\n");
  const auto m = load_manifest(dir / "m.csv");
  CHECK(m.fs == 256.0);
  CHECK(m.name == "demo");
  CHECK(m.entries.size() == 2);
}

TEST_CASE("manifest validation errors") {
  TempDir dir;
  write_text(dir / "one.csv", "path,label\na.txt,good\nb.txt,good\n");
  CHECK(error_code([&] { load_manifest(dir / "one.csv"); }) == ErrorCode::kSingleClassDataset);

  write_text(dir / "empty_path.csv", "path,label\na.txt,good\n,bad\n");
  auto e = fftest::catch_error([&] { load_manifest(dir / "empty_path.csv"); });
  REQUIRE(e);
  CHECK(e->code() == ErrorCode::kMalformedRow);
  CHECK(e->location() == 3u);

  write_text(dir / "dup.csv", "path,label\na.txt,good\na.txt,bad\n");
  CHECK(error_code([&] { load_manifest(dir / "dup.csv"); }) == ErrorCode::kMalformedRow);

  write_text(dir / "noheader.csv", "a.txt,good\n");
  CHECK(error_code([&] { load_manifest(dir / "noheader.csv"); }) == ErrorCode::kMalformedRow);

  CHECK(error_code([&] { load_manifest(dir / "absent.csv"); }) == ErrorCode::kMissingFile);
}

TEST_CASE("check_manifest_files names the missing path") {
  TempDir dir;
  write_text(dir / "a.txt", "1\n");
  write_text(dir / "m.csv", "path,label\na.txt,x\nmissing.txt,y\n");
  const auto m = load_manifest(dir / "m.csv");
  auto e = fftest::catch_error([&] { check_manifest_files(m); });
  REQUIRE(e);
  CHECK(e->code() == ErrorCode::kMissingFile);
  CHECK(std::string(e->what()).find("missing.txt") != std::string::npos);
}

TEST_CASE("manifest save then load is identity on entries") {
  TempDir dir;
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DatasetManifest m;
    m.label_names = {"p", "q", "r"};
    m.fs = 100.0 + trial;
    m.name = "set" + std::to_string(trial);
    const std::size_t count = 2 + rng.below(30);
    for (std::size_t i = 0; i < count; ++i) {
      m.entries.push_back({"s" + std::to_string(i) + ".txt", static_cast<int>(i < 3 ? i : rng.below(3))});
    }
    save_manifest(m, dir / "m.csv");
    const auto back = load_manifest(dir / "m.csv");
    REQUIRE(back.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < count; ++i) {
      CHECK(back.entries[i].path == m.entries[i].path);
      CHECK(back.label_names[static_cast<std::size_t>(back.entries[i].label)] ==
            m.label_names[static_cast<std::size_t>(m.entries[i].label)]);
    }
    CHECK(back.fs == m.fs);
    CHECK(back.name == m.name);
  }
}

TEST_CASE("load_signal parses samples in file order") {
  TempDir dir;
  write_text(dir / "s.txt", "1.0\n2.0\n3.0");
  const auto s = load_signal(dir / "s.txt", 10.0, 1);
  CHECK(s.samples == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.fs == 10.0);
  CHECK(s.label == 1);

  write_text(dir / "c.txt", "# header\n4\n\n5\n");
  CHECK(load_signal(dir / "c.txt", 1.0, 0).samples == std::vector<double>{4.0, 5.0});
}

TEST_CASE("load_signal validation") {
  TempDir dir;
  write_text(dir / "bad.txt", "1.0\nabc\n3.0\n");
  auto e = fftest::catch_error([&] { load_signal(dir / "bad.txt", 10.0, 0); });
  REQUIRE(e);
  CHECK(e->code() == ErrorCode::kNonNumericSample);
  CHECK(e->location() == 2u);

  write_text(dir / "nan.txt", "1.0\nnan\n");
  CHECK(error_code([&] { load_signal(dir / "nan.txt", 10.0, 0); }) == ErrorCode::kNonNumericSample);

  write_text(dir / "empty.txt", "");
  CHECK(error_code([&] { load_signal(dir / "empty.txt", 10.0, 0); }) == ErrorCode::kEmptySignal);
  CHECK(error_code([&] { load_signal(dir / "none.txt", 10.0, 0); }) == ErrorCode::kMissingFile);
}

TEST_CASE("save_signal round-trips exactly") {
  TempDir dir;
  Rng rng(5);
  Signal s;
  s.fs = 20.0;
  s.samples = fftest::random_normal(rng, 500, 1e3);
  s.samples.push_back(1e-300);
  s.samples.push_back(-0.1);
  save_signal(s, dir / "s.txt");
  CHECK(load_signal(dir / "s.txt", 20.0, 0).samples == s.samples);
}

TEST_CASE("window plan defaults to one second with half overlap") {
  const auto p = WindowPlan::for_rate(256.0);
  CHECK(p.window_len == 256);
  CHECK(p.hop == 128);
}

TEST_CASE("windows start at multiples of hop") {
  std::vector<double> x(8);
  std::iota(x.begin(), x.end(), 0.0);
  const auto w = windows(std::span<const double>(x), WindowPlan{4, 2});
  REQUIRE(w.size() == 3);
  CHECK(w[0][0] == 0.0);
  CHECK(w[1][0] == 2.0);
  CHECK(w[2][0] == 4.0);
  CHECK(w[2].size() == 4);

  CHECK(error_code([&] { windows(std::span<const double>(x), WindowPlan{10, 5}); }) ==
        ErrorCode::kWindowTooLong);
}

TEST_CASE("one-second windows on bearing-length records") {
  const auto plan = WindowPlan::for_rate(20000.0);
  CHECK(window_count(20000, plan) == 1);
  CHECK(window_count(40000, plan) == 3);
}

TEST_CASE("property: window count matches enumeration and stays in bounds") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + rng.below(40);
    const std::size_t hop = 1 + rng.below(len);
    const std::size_t n = len + rng.below(200);
    // Enumeration oracle: every start whose full window fits.
    std::size_t expect = 0;
    for (std::size_t start = 0; start + len <= n; start += hop) ++expect;
    CHECK(window_count(n, WindowPlan{len, hop}) == expect);

    std::vector<double> x(n);
    std::iota(x.begin(), x.end(), 0.0);
    const auto w = windows(std::span<const double>(x), WindowPlan{len, hop});
    REQUIRE(w.size() == expect);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w[i].size() == len);
      CHECK(w[i].front() == static_cast<double>(i * hop));
    }
    // Covered range ends exactly at the last window's final sample.
    CHECK(w.back().back() == static_cast<double>((expect - 1) * hop + len - 1));
  }
}

TEST_CASE("mean_subtract") {
  CHECK(mean_subtract(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(mean_subtract(std::vector<double>{1, 2, 3}) == std::vector<double>{-1, 0, 1});

  Signal s;
  s.samples = {2.0, 4.0};
  s.fs = 7.0;
  s.label = 1;
  const auto m = mean_subtract(s);
  CHECK(m.fs == 7.0);
  CHECK(m.label == 1);
  CHECK(m.samples == std::vector<double>{-1.0, 1.0});
}

TEST_CASE("property: mean_subtract zeroes the mean and is idempotent") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = fftest::random_normal(rng, 1000, 10.0);
    for (double& v : x) v += 300.0;
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    const auto y = mean_subtract(x);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    CHECK(std::abs(mean) <= 1e-12 * max_abs);
    const auto z = mean_subtract(y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(std::abs(z[i] - y[i]) <= 1e-12 * max_abs);
    }
  }
}
