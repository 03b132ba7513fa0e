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

// JSON run configuration. Every field is optional and falls back to the
// module defaults; unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/features.hpp"
#include "rhythmaug/glottal.hpp"
#include "rhythmaug/rpm.hpp"
#include "rhythmaug/synthesis.hpp"

namespace rhythmaug {

struct AudioSettings {
  WavEncoding encoding = WavEncoding::kFloat32;
};

// IAIF settings whose defaults depend on the sample rate stay unset until
// resolve() sees the audio.
struct IaifSettings {
  std::optional<std::size_t> vocal_tract_order;
  std::size_t glottal_order = 4;
  double lip_d = kDefaultLipCoefficient;
  std::optional<std::size_t> win_length;
  std::optional<std::size_t> hop_length;
  WindowKind window = WindowKind::kHann;
  double highpass_cutoff = 70.0;

  IaifConfig resolve(int sample_rate) const {
    IaifConfig cfg = IaifConfig::defaults(sample_rate);
    if (vocal_tract_order) cfg.vocal_tract_order = *vocal_tract_order;
    cfg.glottal_order = glottal_order;
    cfg.lip_d = lip_d;
    if (win_length) cfg.frame.win_length = *win_length;
    if (hop_length) cfg.frame.hop_length = *hop_length;
    cfg.frame.window = window;
    cfg.highpass_cutoff = highpass_cutoff;
    cfg.validate();
    return cfg;
  }
};

struct RunConfig {
  AudioSettings audio;
  IaifSettings iaif;
  FeatureConfig features;
  RpmConfig rpm;
  GriffinLimConfig griffin_lim;
  std::optional<std::uint64_t> griffin_lim_seed;
  std::uint64_t seed = 0;

  // Propagates the run seed into the components that consume randomness.
  void set_seed(std::uint64_t value) {
    seed = value;
    rpm.seed = value;
    griffin_lim.seed = griffin_lim_seed.value_or(value);
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view section,
                                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw Error(Errc::kConfigError, std::string(section.empty() ? "config" : section) +
                                        " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      const std::string path = section.empty() ? key : std::string(section) + "." + key;
      throw Error(Errc::kConfigError, "unknown key '" + path + "'");
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, std::string_view section, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::kConfigError, std::string(section) + "." + key + " has the wrong type");
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, std::string_view section, const char* key,
                std::optional<T>& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  T value{};
  read_field(obj, section, key, value);
  out = value;
}

inline WindowKind parse_window(const std::string& name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rect") return WindowKind::kRect;
  throw Error(Errc::kConfigError, "unknown window '" + name + "'");
}

inline std::string window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRect: return "rect";
  }
  return "hann";
}

inline void read_window(const nlohmann::json& obj, std::string_view section, WindowKind& out) {
  std::string name;
  read_field(obj, section, "window", name);
  if (!name.empty()) out = parse_window(name);
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& doc) {
  using detail::read_field;
  RunConfig cfg;
  detail::reject_unknown_keys(doc, "", {"audio", "iaif", "features", "rpm", "griffin_lim", "seed"});

  if (const auto it = doc.find("audio"); it != doc.end()) {
    detail::reject_unknown_keys(*it, "audio", {"encoding"});
    std::string encoding;
    read_field(*it, "audio", "encoding", encoding);
    if (encoding == "pcm16") {
      cfg.audio.encoding = WavEncoding::kPcm16;
    } else if (encoding == "float32" || encoding.empty()) {
      cfg.audio.encoding = WavEncoding::kFloat32;
    } else {
      throw Error(Errc::kConfigError, "audio.encoding must be pcm16 or float32");
    }
  }

  if (const auto it = doc.find("iaif"); it != doc.end()) {
    const auto& s = *it;
    detail::reject_unknown_keys(s, "iaif",
                                {"vocal_tract_order", "glottal_order", "lip_d", "win_length",
                                 "hop_length", "window", "highpass_cutoff"});
    read_field(s, "iaif", "vocal_tract_order", cfg.iaif.vocal_tract_order);
    read_field(s, "iaif", "glottal_order", cfg.iaif.glottal_order);
    read_field(s, "iaif", "lip_d", cfg.iaif.lip_d);
    read_field(s, "iaif", "win_length", cfg.iaif.win_length);
    read_field(s, "iaif", "hop_length", cfg.iaif.hop_length);
    detail::read_window(s, "iaif", cfg.iaif.window);
    read_field(s, "iaif", "highpass_cutoff", cfg.iaif.highpass_cutoff);
    if (!(cfg.iaif.lip_d > 0.0 && cfg.iaif.lip_d < 1.0)) {
      throw Error(Errc::kConfigError, "iaif.lip_d must lie in (0, 1)");
    }
  }

  if (const auto it = doc.find("features"); it != doc.end()) {
    const auto& s = *it;
    auto& f = cfg.features;
    detail::reject_unknown_keys(s, "features",
                                {"n_fft", "win_length", "hop_length", "window", "n_mels", "fmin",
                                 "fmax", "f0_min", "f0_max", "voicing_threshold"});
    read_field(s, "features", "n_fft", f.n_fft);
    read_field(s, "features", "win_length", f.frame.win_length);
    read_field(s, "features", "hop_length", f.frame.hop_length);
    detail::read_window(s, "features", f.frame.window);
    read_field(s, "features", "n_mels", f.n_mels);
    read_field(s, "features", "fmin", f.fmin);
    read_field(s, "features", "fmax", f.fmax);
    read_field(s, "features", "f0_min", f.f0_min);
    read_field(s, "features", "f0_max", f.f0_max);
    read_field(s, "features", "voicing_threshold", f.voicing_threshold);
  }
  cfg.rpm.f0_min = cfg.features.f0_min;

  if (const auto it = doc.find("rpm"); it != doc.end()) {
    const auto& s = *it;
    detail::reject_unknown_keys(s, "rpm", {"seg_min", "seg_max", "factor_lo", "factor_hi"});
    read_field(s, "rpm", "seg_min", cfg.rpm.seg_min);
    read_field(s, "rpm", "seg_max", cfg.rpm.seg_max);
    read_field(s, "rpm", "factor_lo", cfg.rpm.factor_lo);
    read_field(s, "rpm", "factor_hi", cfg.rpm.factor_hi);
    cfg.rpm.validate();
  }

  if (const auto it = doc.find("griffin_lim"); it != doc.end()) {
    const auto& s = *it;
    detail::reject_unknown_keys(s, "griffin_lim", {"n_iters", "init_phase", "seed"});
    read_field(s, "griffin_lim", "n_iters", cfg.griffin_lim.n_iters);
    std::string init;
    read_field(s, "griffin_lim", "init_phase", init);
    if (init == "random") {
      cfg.griffin_lim.init_phase = PhaseInit::kRandom;
    } else if (init == "zeros" || init.empty()) {
      cfg.griffin_lim.init_phase = PhaseInit::kZeros;
    } else {
      throw Error(Errc::kConfigError, "griffin_lim.init_phase must be zeros or random");
    }
    read_field(s, "griffin_lim", "seed", cfg.griffin_lim_seed);
    cfg.griffin_lim.validate();
  }

  std::uint64_t seed = 0;
  read_field(doc, "config", "seed", seed);
  cfg.set_seed(seed);
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kConfigError, path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

// Effective configuration; sample-rate dependent IAIF fields print as null
// when left at their automatic defaults.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  using detail::optional_json;
  using detail::window_name;
  const auto& f = cfg.features;
  return {
      {"audio", {{"encoding", cfg.audio.encoding == WavEncoding::kPcm16 ? "pcm16" : "float32"}}},
      {"iaif",
       {{"vocal_tract_order", optional_json(cfg.iaif.vocal_tract_order)},
        {"glottal_order", cfg.iaif.glottal_order},
        {"lip_d", cfg.iaif.lip_d},
        {"win_length", optional_json(cfg.iaif.win_length)},
        {"hop_length", optional_json(cfg.iaif.hop_length)},
        {"window", window_name(cfg.iaif.window)},
        {"highpass_cutoff", cfg.iaif.highpass_cutoff}}},
      {"features",
       {{"n_fft", f.n_fft},
        {"win_length", f.frame.win_length},
        {"hop_length", f.frame.hop_length},
        {"window", window_name(f.frame.window)},
        {"n_mels", f.n_mels},
        {"fmin", f.fmin},
        {"fmax", optional_json(f.fmax)},
        {"f0_min", f.f0_min},
        {"f0_max", f.f0_max},
        {"voicing_threshold", f.voicing_threshold}}},
      {"rpm",
       {{"seg_min", cfg.rpm.seg_min},
        {"seg_max", cfg.rpm.seg_max},
        {"factor_lo", cfg.rpm.factor_lo},
        {"factor_hi", cfg.rpm.factor_hi}}},
      {"griffin_lim",
       {{"n_iters", cfg.griffin_lim.n_iters},
        {"init_phase", cfg.griffin_lim.init_phase == PhaseInit::kRandom ? "random" : "zeros"},
        {"seed", cfg.griffin_lim.seed}}},
      {"seed", cfg.seed},
  };
}

}  // namespace rhythmaug
