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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace featforge {

/// One labeled 1-D sensor record.
struct Signal {
  std::vector<double> samples;
  double fs = 0.0;
  int label = 0;
  std::string source_id;
};

struct ManifestEntry {
  std::string path;  // as written in the manifest, possibly relative
  int label = 0;
};

/// A dataset listing: signal files with contiguous class ids 0..C-1.
///
/// `label_names[i]` is the original label string for class id i, in order of
/// first appearance. `fs` is 0 when the manifest does not declare it; callers
/// must then supply the rate through configuration.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> label_names;
  double fs = 0.0;
  std::string name;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
  std::size_t class_count() const { return label_names.size(); }
};

struct WindowPlan {
  std::size_t window_len = 0;
  std::size_t hop = 0;

  /// One-second windows with 50% overlap.
  static WindowPlan for_rate(double fs);
  void validate() const;
};

/// Parses a manifest CSV. Header `path,label`, optional `# fs=<hz>` and
/// `# name=<id>` directive lines before the header.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Same format as load_manifest accepts; entries written in manifest order.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Throws MissingFile naming the first entry whose file does not exist.
void check_manifest_files(const DatasetManifest& manifest);

Signal load_signal(const std::filesystem::path& path, double fs, int label);

/// Writes samples one per line with round-trip precision.
void save_signal(const Signal& signal, const std::filesystem::path& path);

std::size_t window_count(std::size_t n, const WindowPlan& plan);

/// Full windows only, starting at 0, hop, 2*hop, ...
std::vector<std::span<const double>> windows(std::span<const double> samples,
                                             const WindowPlan& plan);
std::vector<std::span<const double>> windows(const Signal& signal, const WindowPlan& plan);

Signal mean_subtract(const Signal& signal);
std::vector<double> mean_subtract(std::span<const double> samples);

}  // namespace featforge
