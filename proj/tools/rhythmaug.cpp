// Copyright 2026 The rhythmaug Authors. All Rights Reserved.
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

// rhythmaug: batch front end for glottal flow extraction, feature
// extraction, rhythm-perturbed copy synthesis, speed perturbation and EER
// scoring.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rhythmaug/commands.hpp"

using namespace rhythmaug;

int main(int argc, char** argv) {
  CLI::App app{"Rhythm perturbation data augmentation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Run seed (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");

  std::string manifest;
  auto* glottal = app.add_subcommand("glottal", "Extract glottal flow for every manifest entry");
  glottal->add_option("manifest", manifest, "Input manifest (TSV)")->required();

  auto* features = app.add_subcommand("features", "Write mel/F0 feature files");
  features->add_option("manifest", manifest, "Input manifest (TSV)")->required();

  AugmentOptions aug;
  std::string rpm_switch = "on";
  auto* augment = app.add_subcommand("augment", "Copy-synthesize bonafide entries");
  augment->add_option("manifest", manifest, "Input manifest (TSV)")->required();
  augment->add_option("--rpm", rpm_switch, "Rhythm perturbation")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  augment->add_option("--factor-lo", aug.factor_lo, "Lowest resampling factor");
  augment->add_option("--factor-hi", aug.factor_hi, "Highest resampling factor");
  augment->add_flag("--save-features", aug.save_features, "Also write the perturbed feature file");

  std::string sp_in, sp_out;
  double sp_factor = 1.0;
  auto* speed = app.add_subcommand("speedperturb", "Resample a waveform in time");
  speed->add_option("input", sp_in, "Input WAV")->required();
  speed->add_option("output", sp_out, "Output WAV")->required();
  speed->add_option("--factor", sp_factor, "Duration factor")->required();

  std::string score_file;
  EerOptions eer_opts;
  std::string mapping_path;
  auto* eer = app.add_subcommand("eer", "Pooled and per-attack equal error rates");
  eer->add_option("scores", score_file, "Score file (TSV)")->required();
  eer->add_option("--mapping", mapping_path, "Attack to TTS/VC mapping (TSV)");
  eer->add_flag("--json", eer_opts.json, "Print the report as JSON");
  eer->add_flag("--strict", eer_opts.strict, "Fail on attacks without a mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Logger log(std::cerr);
  BatchOptions batch;
  batch.out_dir = out_dir;
  batch.jobs = jobs;
  try {
    if (!config_path.empty()) batch.config = load_run_config(config_path);
    if (seed) batch.config.set_seed(*seed);
  } catch (const Error& e) {
    log.error(e.what());
    return kExitUsage;
  }

  if (glottal->parsed()) return cmd_glottal(manifest, batch, log);
  if (features->parsed()) return cmd_features(manifest, batch, log);
  if (augment->parsed()) {
    aug.rpm = rpm_switch == "on";
    return cmd_augment(manifest, batch, aug, log);
  }
  if (speed->parsed()) return cmd_speedperturb(sp_in, sp_out, sp_factor, log);
  if (eer->parsed()) {
    if (!mapping_path.empty()) eer_opts.mapping = mapping_path;
    return cmd_eer(score_file, eer_opts, std::cout, log);
  }
  return kExitUsage;
}
