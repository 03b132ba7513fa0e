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

// Batch subcommands behind the rhythmaug tool. Each returns a process exit
// code: 0 clean, 1 usage or configuration error, 2 when some utterances
// failed (the rest of the batch still runs).

#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/config.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/evaluation.hpp"
#include "rhythmaug/features.hpp"
#include "rhythmaug/glottal.hpp"
#include "rhythmaug/rpm.hpp"
#include "rhythmaug/synthesis.hpp"

namespace rhythmaug {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPartial = 2;

// Serializes log lines from worker threads. Lines go to the sink and, once
// attach_file() has been called, to a log file as well.
class Logger {
 public:
  explicit Logger(std::ostream& sink = std::cerr) : sink_(&sink) {}

  void attach_file(const std::filesystem::path& path) {
    std::lock_guard lock(mu_);
    file_.open(path, std::ios::trunc);
  }

  void info(const std::string& msg) { write("INFO", msg); }
  void warn(const std::string& msg) { write("WARN", msg); }
  void error(const std::string& msg) { write("ERROR", msg); }

 private:
  void write(const char* level, const std::string& msg) {
    std::lock_guard lock(mu_);
    *sink_ << level << ' ' << msg << '\n';
    if (file_.is_open()) file_ << level << ' ' << msg << '\n' << std::flush;
  }

  std::mutex mu_;
  std::ostream* sink_;
  std::ofstream file_;
};

// Runs work(i) for i in [0, n) on `jobs` threads pulling indices from a
// shared counter.
inline void parallel_for(std::size_t n, std::size_t jobs,
                         const std::function<void(std::size_t)>& work) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct BatchOptions {
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  RunConfig config;
};

struct AugmentOptions {
  bool rpm = true;
  std::optional<double> factor_lo;
  std::optional<double> factor_hi;
  bool save_features = false;
};

namespace detail {

// Relative manifest paths are resolved against the manifest's directory.
inline std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest,
                                                const std::string& entry_path) {
  const std::filesystem::path p(entry_path);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot open for writing " + path.string());
  out << text;
  if (!out) throw Error(Errc::kIoError, "write failed " + path.string());
}

// Creates the output directory and echoes the effective config before any
// other output is written.
inline void prepare_out_dir(const BatchOptions& opts, const nlohmann::json& effective,
                            Logger& log, std::string_view command) {
  if (opts.out_dir.empty()) throw Error(Errc::kConfigError, "--out is required");
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw Error(Errc::kIoError, "cannot create " + opts.out_dir.string() + ": " + ec.message());
  write_text(opts.out_dir / "config.json", effective.dump(2) + "\n");
  log.attach_file(opts.out_dir / (std::string(command) + ".log"));
}

struct BatchTally {
  std::atomic<std::size_t> ok{0};
  std::atomic<std::size_t> failed{0};
};

inline int exit_code(const BatchTally& tally) {
  return tally.failed.load() == 0 ? kExitOk : kExitPartial;
}

}  // namespace detail

inline int cmd_glottal(const std::filesystem::path& manifest_path, const BatchOptions& opts,
                       Logger& log) {
  std::vector<ManifestEntry> entries;
  try {
    entries = read_manifest(manifest_path);
    detail::prepare_out_dir(opts, run_config_to_json(opts.config), log, "glottal");
  } catch (const Error& e) {
    log.error(std::string("glottal: ") + e.what());
    return kExitUsage;
  }
  if (entries.empty()) {
    log.warn("glottal: manifest " + manifest_path.string() + " is empty");
    return kExitOk;
  }

  detail::BatchTally tally;
  std::atomic<std::size_t> frames{0}, skipped{0};
  parallel_for(entries.size(), opts.jobs, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    try {
      const AudioBuffer audio = read_wav(detail::resolve_audio_path(manifest_path, e.path));
      const GlottalFlow flow = extract_glottal_flow(audio, opts.config.iaif.resolve(audio.sample_rate));
      write_wav(opts.out_dir / (e.utt_id + ".glottal.wav"), flow.audio, opts.config.audio.encoding);
      frames += flow.frames;
      skipped += flow.skipped_frames.size();
      if (!flow.skipped_frames.empty()) {
        log.warn("glottal: utt=" + e.utt_id + " passed " + std::to_string(flow.skipped_frames.size()) +
                 " unstable frame(s) through raw");
      }
      ++tally.ok;
    } catch (const std::exception& ex) {
      ++tally.failed;
      log.error("glottal: utt=" + e.utt_id + ": " + ex.what());
    }
  });

  log.info("glottal: " + std::to_string(tally.ok.load()) + " ok, " +
           std::to_string(tally.failed.load()) + " failed, " + std::to_string(skipped.load()) + "/" +
           std::to_string(frames.load()) + " frames skipped");
  return detail::exit_code(tally);
}

inline int cmd_features(const std::filesystem::path& manifest_path, const BatchOptions& opts,
                        Logger& log) {
  std::vector<ManifestEntry> entries;
  try {
    entries = read_manifest(manifest_path);
    detail::prepare_out_dir(opts, run_config_to_json(opts.config), log, "features");
  } catch (const Error& e) {
    log.error(std::string("features: ") + e.what());
    return kExitUsage;
  }
  if (entries.empty()) {
    log.warn("features: manifest " + manifest_path.string() + " is empty");
    return kExitOk;
  }

  detail::BatchTally tally;
  parallel_for(entries.size(), opts.jobs, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    try {
      const AudioBuffer audio = read_wav(detail::resolve_audio_path(manifest_path, e.path));
      write_features(opts.out_dir / (e.utt_id + ".rfb"), extract_features(audio, opts.config.features));
      ++tally.ok;
    } catch (const std::exception& ex) {
      ++tally.failed;
      log.error("features: utt=" + e.utt_id + ": " + ex.what());
    }
  });
  log.info("features: " + std::to_string(tally.ok.load()) + " ok, " +
           std::to_string(tally.failed.load()) + " failed");
  return detail::exit_code(tally);
}

// Copy-synthesizes every bonafide entry. Outputs <utt>.synth.wav, the plan
// sidecar <utt>.plan.json when RPM is on, and augmented.tsv labelling every
// output as spoof with attack "RPM" or "COPY".
inline int cmd_augment(const std::filesystem::path& manifest_path, BatchOptions opts,
                       const AugmentOptions& aug, Logger& log) {
  std::vector<ManifestEntry> entries;
  try {
    if (aug.factor_lo) opts.config.rpm.factor_lo = *aug.factor_lo;
    if (aug.factor_hi) opts.config.rpm.factor_hi = *aug.factor_hi;
    opts.config.rpm.validate();
    entries = read_manifest(manifest_path);
    nlohmann::json effective = run_config_to_json(opts.config);
    effective["augment"] = {{"rpm", aug.rpm}, {"save_features", aug.save_features}};
    detail::prepare_out_dir(opts, effective, log, "augment");
  } catch (const Error& e) {
    log.error(std::string("augment: ") + e.what());
    return kExitUsage;
  }

  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].key == TrialKey::kBonafide) {
      work.push_back(i);
    } else {
      log.warn("augment: skipping spoof entry utt=" + entries[i].utt_id);
    }
  }
  const std::string tag = aug.rpm ? "RPM" : "COPY";
  if (work.empty()) {
    log.warn("augment: no bonafide entries in " + manifest_path.string());
  }

  std::vector<std::optional<ManifestEntry>> produced(work.size());
  detail::BatchTally tally;
  const std::optional<RpmConfig> rpm = aug.rpm ? std::optional(opts.config.rpm) : std::nullopt;
  parallel_for(work.size(), opts.jobs, [&](std::size_t w) {
    const ManifestEntry& e = entries[work[w]];
    try {
      const AudioBuffer audio = read_wav(detail::resolve_audio_path(manifest_path, e.path));
      const CopySynthesisResult synth =
          copy_synthesize(audio, opts.config.features, rpm, opts.config.griffin_lim, e.utt_id);
      const std::string wav_name = e.utt_id + ".synth.wav";
      write_wav(opts.out_dir / wav_name, synth.audio, opts.config.audio.encoding);
      if (synth.plan) {
        detail::write_text(opts.out_dir / (e.utt_id + ".plan.json"),
                           plan_to_json(e.utt_id, opts.config.rpm.seed, *synth.plan).dump(2) + "\n");
      }
      if (aug.save_features) write_features(opts.out_dir / (e.utt_id + ".synth.rfb"), synth.features);
      produced[w] = ManifestEntry{e.utt_id + "-" + tag, wav_name, TrialKey::kSpoof, tag};
      ++tally.ok;
    } catch (const std::exception& ex) {
      ++tally.failed;
      log.error("augment: utt=" + e.utt_id + ": " + ex.what());
    }
  });

  std::vector<ManifestEntry> out_manifest;
  for (auto& p : produced) {
    if (p) out_manifest.push_back(std::move(*p));
  }
  try {
    write_manifest(opts.out_dir / "augmented.tsv", out_manifest);
  } catch (const Error& e) {
    log.error(std::string("augment: ") + e.what());
    return kExitPartial;
  }
  log.info("augment: " + std::to_string(tally.ok.load()) + " ok, " +
           std::to_string(tally.failed.load()) + " failed, rpm=" + (aug.rpm ? "on" : "off"));
  return detail::exit_code(tally);
}

// Writes the stretched audio in the input file's encoding.
inline int cmd_speedperturb(const std::filesystem::path& in, const std::filesystem::path& out,
                            double factor, Logger& log) {
  try {
    if (!(factor > 0.0)) throw Error(Errc::kInvalidArgument, "--factor must be > 0");
    const DecodedWav decoded = decode_wav(in);
    write_wav(out, speed_perturb(decoded.audio, factor), decoded.encoding);
  } catch (const std::exception& e) {
    log.error(std::string("speedperturb: ") + e.what());
    return kExitUsage;
  }
  return kExitOk;
}

struct EerOptions {
  std::optional<std::filesystem::path> mapping;
  bool json = false;
  bool strict = false;
};

inline int cmd_eer(const std::filesystem::path& score_path, const EerOptions& opts,
                   std::ostream& out, Logger& log) {
  try {
    const ScoreSet scores = read_scores(score_path);
    const AttackMapping mapping =
        opts.mapping ? read_attack_mapping(*opts.mapping) : default_attack_mapping();
    const EerBreakdown report = eer_breakdown(scores, mapping, opts.strict);
    for (const auto& attack : report.unmapped_attacks) {
      log.warn("eer: attack '" + attack + "' has no TTS/VC mapping");
    }
    if (opts.json) {
      out << breakdown_to_json(report).dump(2) << '\n';
    } else {
      out << format_breakdown(report);
    }
  } catch (const std::exception& e) {
    log.error(std::string("eer: ") + e.what());
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace rhythmaug
