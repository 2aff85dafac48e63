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

#include "featforge/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "featforge/error.hpp"
#include "text_util.hpp"

namespace featforge {

namespace {

enum class ValueType { kDouble, kInt, kSize, kDoubles, kSizes, kList, kString };

struct KeySpec {
  const char* key;
  ValueType type;
  const char* default_value;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"bins", ValueType::kSize, "10"},
      {"c_values", ValueType::kDoubles, "0.1,1,10,100"},
      {"coef0_values", ValueType::kDoubles, "0,1"},
      {"components", ValueType::kSize, "5"},
      {"degree_values", ValueType::kSizes, "2,3"},
      {"exhaustive_limit", ValueType::kSize, "15"},
      {"fft_size", ValueType::kSize, "256"},
      {"folds", ValueType::kSize, "5"},
      {"fs", ValueType::kDouble, "0"},
      {"gamma_values", ValueType::kDoubles, "0.01,0.1,1"},
      {"hop", ValueType::kSize, "0"},
      {"instances", ValueType::kSize, "0"},
      {"jobs", ValueType::kSize, "1"},
      {"k_schedule", ValueType::kSizes, "5,10,15,20,25"},
      {"kernels", ValueType::kList, "linear,rbf,sigmoid,polynomial"},
      {"layers", ValueType::kSizes, "1"},
      {"max_layer", ValueType::kSize, "3"},
      {"metric", ValueType::kString, "accuracy"},
      {"mrms_beta", ValueType::kDouble, "0.5"},
      {"n", ValueType::kSize, "0"},
      {"noise_sigma", ValueType::kDouble, "-1"},
      {"pca_method", ValueType::kList, "svd"},
      {"prescreen", ValueType::kSize, "2000"},
      {"protocol", ValueType::kString, "stratified-k"},
      {"recipe", ValueType::kString, "spectral-band"},
      {"seed", ValueType::kSize, "0"},
      {"soa_accuracy", ValueType::kString, ""},
      {"soa_features", ValueType::kString, ""},
      {"svm_max_passes", ValueType::kSize, "10000"},
      {"svm_tolerance", ValueType::kDouble, "0.001"},
      {"tau", ValueType::kDouble, "0.95"},
      {"top", ValueType::kSize, "15"},
      {"wavelets", ValueType::kList,
       "haar,db2,db3,db4,db6,db8,sym4,sym6,sym8,coif2,coif4"},
      {"window_len", ValueType::kSize, "0"},
  };
  return table;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : key_table()) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto& part : detail::split(value, ',')) {
    auto t = detail::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void check_value(const KeySpec& spec, const std::string& value) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::kInvalidArgument,
                 std::string("config key '") + spec.key + "': " + why + " ('" + value + "')");
  };
  switch (spec.type) {
    case ValueType::kDouble:
      if (!detail::parse_double(value)) throw bad("expected a number");
      break;
    case ValueType::kInt:
      if (!detail::parse_int(value)) throw bad("expected an integer");
      break;
    case ValueType::kSize: {
      auto v = detail::parse_int(value);
      if (!v || *v < 0) throw bad("expected a non-negative integer");
      break;
    }
    case ValueType::kDoubles:
      if (split_list(value).empty()) throw bad("expected a comma-separated list");
      for (const auto& p : split_list(value)) {
        if (!detail::parse_double(p)) throw bad("expected numbers");
      }
      break;
    case ValueType::kSizes:
      if (split_list(value).empty()) throw bad("expected a comma-separated list");
      for (const auto& p : split_list(value)) {
        auto v = detail::parse_int(p);
        if (!v || *v < 0) throw bad("expected non-negative integers");
      }
      break;
    case ValueType::kList:
      if (split_list(value).empty()) throw bad("expected a comma-separated list");
      break;
    case ValueType::kString:
      break;
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : key_table()) values_[k.key] = k.default_value;
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.emplace_back(k.key);
    return out;
  }();
  return keys;
}

bool RunConfig::is_known(std::string_view key) { return find_key(key) != nullptr; }

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw Error(ErrorCode::kUnknownConfigKey, "unknown config key '" + key + "'");
  const std::string trimmed(detail::trim(value));
  check_value(*spec, trimmed);
  values_[key] = trimmed;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kUnknownConfigKey, "unknown config key '" + key + "'");
  return it->second;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open config " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedRow, path.string() + ": expected key=value", number);
    }
    const std::string key(detail::trim(text.substr(0, eq)));
    const std::string value(detail::trim(text.substr(eq + 1)));
    try {
      set(key, value);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what(), number);
    }
  }
}

std::string RunConfig::render() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << render();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

double RunConfig::get_double(const std::string& key) const { return *detail::parse_double(get(key)); }

std::int64_t RunConfig::get_int(const std::string& key) const { return *detail::parse_int(get(key)); }

std::size_t RunConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(*detail::parse_int(get(key)));
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(get(key))) out.push_back(*detail::parse_double(p));
  return out;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& p : split_list(get(key))) out.push_back(static_cast<std::size_t>(*detail::parse_int(p)));
  return out;
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  return split_list(get(key));
}

unsigned RunConfig::jobs() const {
  const auto j = get_size("jobs");
  return j == 0 ? 1u : static_cast<unsigned>(j);
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig c;
  c.tau = get_double("tau");
  c.metric = metric_from_string(get("metric"));
  c.selection.k_schedule = get_sizes("k_schedule");
  c.selection.bin_count = get_size("bins");
  c.selection.mrms_beta = get_double("mrms_beta");
  c.selection.prescreen = get_size("prescreen");
  c.window_len = get_size("window_len");
  c.hop = get_size("hop");
  c.fft_size = get_size("fft_size");
  c.wavelets = get_list("wavelets");
  c.grid.kinds.clear();
  for (const auto& k : get_list("kernels")) c.grid.kinds.push_back(kernel_kind_from_string(k));
  c.grid.c_values = get_doubles("c_values");
  c.grid.gamma_values = get_doubles("gamma_values");
  c.grid.degree_values.clear();
  for (auto d : get_sizes("degree_values")) c.grid.degree_values.push_back(static_cast<int>(d));
  c.grid.coef0_values = get_doubles("coef0_values");
  c.solver.tolerance = get_double("svm_tolerance");
  c.solver.max_passes = get_size("svm_max_passes");
  c.protocol = get("protocol");
  c.folds = get_size("folds");
  c.seed = get_size("seed");
  c.jobs = jobs();
  c.exhaustive_limit = get_size("exhaustive_limit");
  c.max_layer = static_cast<int>(get_size("max_layer"));
  c.fs = get_double("fs");
  c.validate();
  return c;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s;
  s.recipe = get("recipe");
  s.instances = get_size("instances");
  s.n = get_size("n");
  s.fs = get_double("fs");
  s.noise_sigma = get_double("noise_sigma");
  s.seed = get_size("seed");
  s.validate();
  return s;
}

}  // namespace featforge
