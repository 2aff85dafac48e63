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

// featforge command-line front end. Talks to the library only through the C
// API in featforge/featforge.h.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "featforge/featforge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitNotConverged = 4;

struct ConfigDeleter {
  void operator()(ff_config* c) const { ff_config_free(c); }
};
struct ReportDeleter {
  void operator()(ff_report* r) const { ff_report_free(r); }
};
using ConfigPtr = std::unique_ptr<ff_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<ff_report, ReportDeleter>;

// Owns a string returned by the library.
class LibString {
 public:
  LibString() = default;
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  ~LibString() { ff_string_free(p_); }
  char** out() { return &p_; }
  const char* get() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

int fail(ff_status status) {
  std::cerr << "featforge: error: " << ff_last_error() << " [" << ff_status_name(status) << "]\n";
  return ff_status_is_validation(status) ? kExitValidation : kExitRuntime;
}

// Settings shared by every subcommand: config file, --set overrides and
// explicit flags, applied in that order.
struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "override one configuration key (key=value)");
  }

  // Registers a flag that maps onto configuration key `key`.
  void flag(CLI::App* cmd, const std::string& name, const std::string& key, const std::string& help) {
    auto slot = std::make_shared<std::string>();
    cmd->add_option(name, *slot, help)->each([this, key](const std::string& v) {
      flags.emplace_back(key, v);
    });
    keep_.push_back(slot);
  }

  ff_status build(ConfigPtr& config) const {
    config.reset(ff_config_new());
    if (!config) return FF_E_INTERNAL;
    if (!config_file.empty()) {
      if (auto s = ff_config_load_file(config.get(), config_file.c_str()); s != FF_OK) return s;
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "featforge: error: --set expects key=value, got '" << kv << "'\n";
        return FF_E_INVALID_ARGUMENT;
      }
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (auto s = ff_config_set(config.get(), key.c_str(), value.c_str()); s != FF_OK) return s;
    }
    for (const auto& [k, v] : flags) {
      if (auto s = ff_config_set(config.get(), k.c_str(), v.c_str()); s != FF_OK) return s;
    }
    return FF_OK;
  }

 private:
  std::vector<std::shared_ptr<std::string>> keep_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"featforge: layered feature engineering for labeled 1-D signals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ff_version()));

  // synth
  CommonOptions synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_opts.add_to(synth);
  synth_opts.flag(synth, "--recipe", "recipe",
                  "bearing-like | ppg-like | spectral-band | peak-rhythm | xor-features");
  synth_opts.flag(synth, "--seed", "seed", "random seed");
  synth_opts.flag(synth, "--instances", "instances", "instances per class");
  synth_opts.flag(synth, "--n", "n", "samples per signal");
  synth_opts.flag(synth, "--fs", "fs", "sampling rate in Hz");
  synth_opts.flag(synth, "--noise-sigma", "noise_sigma", "noise standard deviation");
  synth_opts.flag(synth, "--jobs", "jobs", "worker threads");
  synth->add_option("--out", synth_out, "output directory")->required();

  // extract
  CommonOptions extract_opts;
  std::string extract_manifest, extract_out;
  auto* extract = app.add_subcommand("extract", "extract feature layers to CSV");
  extract_opts.add_to(extract);
  extract->add_option("manifest", extract_manifest, "dataset manifest CSV")->required();
  extract->add_option("--out", extract_out, "output directory")->required();
  extract_opts.flag(extract, "--layers", "layers", "comma-separated layers, e.g. 1,2");
  extract_opts.flag(extract, "--fs", "fs", "sampling rate when the manifest has none");
  extract_opts.flag(extract, "--jobs", "jobs", "worker threads");

  // run
  CommonOptions run_opts;
  std::string run_manifest, run_out;
  auto* run = app.add_subcommand("run", "run the layered pipeline and write a report");
  run_opts.add_to(run);
  run->add_option("manifest", run_manifest, "dataset manifest CSV")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run_opts.flag(run, "--tau", "tau", "target score in [0, 1]");
  run_opts.flag(run, "--metric", "metric", "accuracy | sensitivity | specificity | f_score");
  run_opts.flag(run, "--seed", "seed", "fold assignment seed");
  run_opts.flag(run, "--protocol", "protocol", "stratified-k | bearing-5fold | bp-3set");
  run_opts.flag(run, "--max-layer", "max_layer", "highest layer to try (1-3)");
  run_opts.flag(run, "--fs", "fs", "sampling rate when the manifest has none");
  run_opts.flag(run, "--jobs", "jobs", "worker threads");

  // baseline
  CommonOptions base_opts;
  std::string base_manifest, base_out, base_report;
  auto* baseline = app.add_subcommand("baseline", "PCA + RBF-SVM comparison");
  base_opts.add_to(baseline);
  baseline->add_option("manifest", base_manifest, "dataset manifest CSV")->required();
  baseline->add_option("--out", base_out, "output directory")->required();
  baseline->add_option("--report", base_report, "pipeline report.json to compare against");
  base_opts.flag(baseline, "--method", "pca_method", "svd, eig, or svd,eig");
  base_opts.flag(baseline, "--components", "components", "principal components kept");
  base_opts.flag(baseline, "--soa-accuracy", "soa_accuracy", "published accuracy in percent");
  base_opts.flag(baseline, "--soa-features", "soa_features", "published feature count");
  base_opts.flag(baseline, "--seed", "seed", "fold assignment seed");
  base_opts.flag(baseline, "--fs", "fs", "sampling rate when the manifest has none");
  base_opts.flag(baseline, "--jobs", "jobs", "worker threads");

  // budget
  std::int64_t budget_n = 0;
  double budget_fs = 0.0;
  std::int64_t budget_fft = 256;
  auto* budget = app.add_subcommand("budget", "print feature counts per layer");
  budget->add_option("--n", budget_n, "samples per signal")->required();
  budget->add_option("--fs", budget_fs, "sampling rate in Hz")->required();
  budget->add_option("--fft-size", budget_fft, "transform length");

  // report
  std::string report_path;
  std::size_t report_top = 15;
  std::string report_format = "text";
  auto* report = app.add_subcommand("report", "render a saved report");
  report->add_option("report", report_path, "report.json")->required();
  report->add_option("--top", report_top, "recommendations to show");
  report->add_option("--format", report_format, "text | json | recommend")
      ->check(CLI::IsMember({"text", "json", "recommend"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  ConfigPtr config;

  if (*synth) {
    if (auto s = synth_opts.build(config); s != FF_OK) return fail(s);
    if (auto s = ff_synth(config.get(), synth_out.c_str()); s != FF_OK) return fail(s);
    std::cout << "wrote dataset to " << synth_out << "\n";
    return kExitOk;
  }

  if (*extract) {
    if (auto s = extract_opts.build(config); s != FF_OK) return fail(s);
    if (auto s = ff_extract(config.get(), extract_manifest.c_str(), extract_out.c_str()); s != FF_OK) {
      return fail(s);
    }
    std::cout << "wrote " << extract_out << "/features.csv\n";
    return kExitOk;
  }

  if (*run) {
    if (auto s = run_opts.build(config); s != FF_OK) return fail(s);
    ff_report* raw = nullptr;
    if (auto s = ff_run(config.get(), run_manifest.c_str(), &raw); s != FF_OK) return fail(s);
    ReportPtr rep(raw);
    if (auto s = ff_report_write(rep.get(), run_out.c_str()); s != FF_OK) return fail(s);
    LibString text;
    if (auto s = ff_report_text(rep.get(), 15, text.out()); s != FF_OK) return fail(s);
    std::cout << text.get();
    return ff_report_converged(rep.get()) ? kExitOk : kExitNotConverged;
  }

  if (*baseline) {
    if (auto s = base_opts.build(config); s != FF_OK) return fail(s);
    LibString table;
    const char* rp = base_report.empty() ? nullptr : base_report.c_str();
    if (auto s = ff_baseline(config.get(), base_manifest.c_str(), rp, base_out.c_str(), table.out());
        s != FF_OK) {
      return fail(s);
    }
    std::cout << table.get();
    return kExitOk;
  }

  if (*budget) {
    if (budget_n <= 0 || !(budget_fs > 0.0) || budget_fft <= 0) {
      std::cerr << "featforge: error: --n, --fs and --fft-size must be positive\n";
      return kExitValidation;
    }
    LibString text;
    if (auto s = ff_budget(static_cast<std::uint64_t>(budget_n), budget_fs,
                           static_cast<std::size_t>(budget_fft), text.out());
        s != FF_OK) {
      return fail(s);
    }
    std::cout << text.get();
    return kExitOk;
  }

  if (*report) {
    ff_report* raw = nullptr;
    if (auto s = ff_report_load(report_path.c_str(), &raw); s != FF_OK) return fail(s);
    ReportPtr rep(raw);
    LibString text;
    ff_status s = FF_OK;
    if (report_format == "json") {
      s = ff_report_json(rep.get(), text.out());
    } else if (report_format == "recommend") {
      s = ff_recommend(rep.get(), report_top, text.out());
    } else {
      s = ff_report_text(rep.get(), report_top, text.out());
    }
    if (s != FF_OK) return fail(s);
    std::cout << text.get();
    return kExitOk;
  }
  return kExitValidation;
}
