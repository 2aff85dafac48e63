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

#include "featforge/signal_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "featforge/error.hpp"
#include "text_util.hpp"

namespace featforge {

namespace fs = std::filesystem;

fs::path DatasetManifest::resolve(const ManifestEntry& entry) const {
  fs::path p(entry.path);
  if (p.is_absolute()) return p;
  return base_dir / p;
}

WindowPlan WindowPlan::for_rate(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw Error(ErrorCode::kInvalidArgument, "sampling rate must be positive");
  }
  WindowPlan plan;
  plan.window_len = static_cast<std::size_t>(std::llround(fs));
  if (plan.window_len < 2) plan.window_len = 2;
  plan.hop = plan.window_len / 2;
  return plan;
}

void WindowPlan::validate() const {
  if (window_len == 0 || hop == 0 || hop > window_len) {
    throw Error(ErrorCode::kInvalidArgument,
                "window plan needs 0 < hop <= window_len (got window_len=" +
                    std::to_string(window_len) + ", hop=" + std::to_string(hop) + ")");
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open manifest " + path.string());

  DatasetManifest manifest;
  manifest.base_dir = path.parent_path();
  manifest.name = path.stem().string();

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      auto directive = detail::trim(text.substr(1));
      auto eq = directive.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = detail::trim(directive.substr(0, eq));
      auto value = detail::trim(directive.substr(eq + 1));
      if (key == "fs") {
        auto parsed = detail::parse_double(value);
        if (!parsed || !(*parsed > 0.0)) {
          throw Error(ErrorCode::kMalformedRow, "bad fs directive in " + path.string(), line_no);
        }
        manifest.fs = *parsed;
      } else if (key == "name") {
        manifest.name = std::string(value);
      }
      continue;
    }
    auto fields = detail::split(text, ',');
    if (!have_header) {
      if (fields.size() != 2 || detail::trim(fields[0]) != "path" ||
          detail::trim(fields[1]) != "label") {
        throw Error(ErrorCode::kMalformedRow, "expected header 'path,label'", line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::kMalformedRow, "expected 2 fields", line_no);
    }
    std::string entry_path(detail::trim(fields[0]));
    std::string label(detail::trim(fields[1]));
    if (entry_path.empty()) throw Error(ErrorCode::kMalformedRow, "empty path", line_no);
    if (label.empty()) throw Error(ErrorCode::kMalformedRow, "empty label", line_no);
    if (!seen.insert(entry_path).second) {
      throw Error(ErrorCode::kMalformedRow, "duplicate path " + entry_path, line_no);
    }
    int id = -1;
    for (std::size_t i = 0; i < manifest.label_names.size(); ++i) {
      if (manifest.label_names[i] == label) id = static_cast<int>(i);
    }
    if (id < 0) {
      id = static_cast<int>(manifest.label_names.size());
      manifest.label_names.push_back(label);
    }
    manifest.entries.push_back({entry_path, id});
  }
  if (!have_header) throw Error(ErrorCode::kMalformedRow, "missing header", line_no + 1);
  if (manifest.label_names.size() < 2) {
    throw Error(ErrorCode::kSingleClassDataset,
                path.string() + " lists " + std::to_string(manifest.label_names.size()) +
                    " distinct label(s)");
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  if (manifest.fs > 0.0) out << "# fs=" << detail::format_double(manifest.fs) << '\n';
  if (!manifest.name.empty()) out << "# name=" << manifest.name << '\n';
  out << "path,label\n";
  for (const auto& e : manifest.entries) {
    out << e.path << ',' << manifest.label_names.at(static_cast<std::size_t>(e.label)) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void check_manifest_files(const DatasetManifest& manifest) {
  for (const auto& e : manifest.entries) {
    auto p = manifest.resolve(e);
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorCode::kMissingFile, "signal file not found: " + p.string());
    }
  }
}

Signal load_signal(const fs::path& path, double fs, int label) {
  if (!(fs > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sampling rate must be positive");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open signal file " + path.string());

  Signal signal;
  signal.fs = fs;
  signal.label = label;
  signal.source_id = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto value = detail::parse_double(text);
    if (!value || !std::isfinite(*value)) {
      throw Error(ErrorCode::kNonNumericSample, path.string() + ": '" + std::string(text) + "'",
                  line_no);
    }
    signal.samples.push_back(*value);
  }
  if (signal.samples.empty()) throw Error(ErrorCode::kEmptySignal, path.string());
  return signal;
}

void save_signal(const Signal& signal, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (double v : signal.samples) out << detail::format_double(v) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::size_t window_count(std::size_t n, const WindowPlan& plan) {
  plan.validate();
  if (plan.window_len > n) return 0;
  return (n - plan.window_len) / plan.hop + 1;
}

std::vector<std::span<const double>> windows(std::span<const double> samples,
                                             const WindowPlan& plan) {
  plan.validate();
  if (plan.window_len > samples.size()) {
    throw Error(ErrorCode::kWindowTooLong, "window of " + std::to_string(plan.window_len) +
                                               " samples on a " +
                                               std::to_string(samples.size()) + "-sample signal");
  }
  std::size_t count = window_count(samples.size(), plan);
  std::vector<std::span<const double>> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    out.push_back(samples.subspan(w * plan.hop, plan.window_len));
  }
  return out;
}

std::vector<std::span<const double>> windows(const Signal& signal, const WindowPlan& plan) {
  return windows(std::span<const double>(signal.samples), plan);
}

std::vector<double> mean_subtract(std::span<const double> samples) {
  if (samples.empty()) return {};
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  std::vector<double> out(samples.begin(), samples.end());
  for (double& v : out) v -= mean;
  return out;
}

Signal mean_subtract(const Signal& signal) {
  Signal out = signal;
  out.samples = mean_subtract(std::span<const double>(signal.samples));
  return out;
}

}  // namespace featforge
