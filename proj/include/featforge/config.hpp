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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "featforge/pipeline.hpp"
#include "featforge/synth.hpp"

namespace featforge {

/// Textual key=value configuration shared by every subcommand. Every key has
/// a default; unknown keys are rejected when set or loaded.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<std::string>& known_keys();
  static bool is_known(std::string_view key);

  /// Throws UnknownConfigKey, or InvalidArgument when the value does not parse
  /// as the key's type.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  /// Lines of `key = value`; `#` starts a comment. Errors carry line numbers.
  void load_file(const std::filesystem::path& path);
  /// Sorted `key=value` lines.
  std::string render() const;
  void write(const std::filesystem::path& path) const;

  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  PipelineConfig pipeline_config() const;
  SynthSpec synth_spec() const;
  unsigned jobs() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace featforge
