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

// Audio, manifest and feature-file I/O.
//
// Audio is always held as 64-bit floats in memory regardless of the on-disk
// encoding. Only mono RIFF/WAVE files with PCM16 or IEEE float32 samples are
// accepted.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rhythmaug/error.hpp"
#include "rhythmaug/feature_bundle.hpp"

namespace rhythmaug {

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const noexcept { return samples.size(); }
  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

enum class WavEncoding { kPcm16, kFloat32 };

enum class TrialKey { kBonafide, kSpoof };

inline std::string_view key_name(TrialKey key) {
  return key == TrialKey::kBonafide ? "bonafide" : "spoof";
}

struct ManifestEntry {
  std::string utt_id;
  std::string path;
  TrialKey key = TrialKey::kBonafide;
  std::string attack = "-";

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::kNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot open for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoError, "write failed " + path.string());
}

inline std::uint16_t load_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint64_t load_u64(const std::uint8_t* p) {
  return static_cast<std::uint64_t>(load_u32(p)) |
         (static_cast<std::uint64_t>(load_u32(p + 4)) << 32);
}

inline void store_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void store_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void store_f64(std::vector<std::uint8_t>& out, double v) {
  store_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

inline std::string line_error(const std::filesystem::path& path, std::size_t line_no,
                              std::string_view what) {
  std::ostringstream os;
  os << path.string() << ":" << line_no << ": " << what;
  return os.str();
}

inline bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace detail

struct DecodedWav {
  AudioBuffer audio;
  WavEncoding encoding = WavEncoding::kPcm16;
};

// Parses a RIFF/WAVE file, walking chunks until "fmt " and "data" are found.
inline DecodedWav decode_wav(const std::filesystem::path& path) {
  using detail::load_u16;
  using detail::load_u32;
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
  const auto unsupported = [&](const std::string& what) {
    return Error(Errc::kUnsupportedFormat, what + " (" + path.string() + ")");
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw unsupported("container=not RIFF/WAVE");
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) throw unsupported("fmt chunk truncated");
      format_tag = load_u16(chunk + 8);
      channels = load_u16(chunk + 10);
      rate = load_u32(chunk + 12);
      bits = load_u16(chunk + 22);
      // WAVE_FORMAT_EXTENSIBLE stores the real tag in the sub-format GUID.
      if (format_tag == 0xFFFE && size >= 40 && available >= 40) {
        format_tag = load_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, available);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw unsupported("missing fmt chunk");
  if (channels != 1) throw unsupported("channels=" + std::to_string(channels));
  if (format_tag != 1 && format_tag != 3) {
    throw unsupported("format_tag=" + std::to_string(format_tag));
  }
  if (format_tag == 1 && bits != 16) {
    throw unsupported("bits_per_sample=" + std::to_string(bits));
  }
  if (format_tag == 3 && bits != 32) {
    throw unsupported("bits_per_sample=" + std::to_string(bits));
  }
  if (rate == 0) throw unsupported("sample_rate=0");
  if (data == nullptr) throw unsupported("missing data chunk");

  DecodedWav out;
  out.audio.sample_rate = static_cast<int>(rate);
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t n = data_size / bytes_per_sample;
  if (n == 0) throw Error(Errc::kEmptyAudio, path.string());
  out.audio.samples.resize(n);
  if (format_tag == 1) {
    out.encoding = WavEncoding::kPcm16;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(load_u16(data + 2 * i));
      out.audio.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else {
    out.encoding = WavEncoding::kFloat32;
    for (std::size_t i = 0; i < n; ++i) {
      const float v = std::bit_cast<float>(load_u32(data + 4 * i));
      if (!std::isfinite(v)) {
        throw Error(Errc::kParseError,
                    "non-finite sample at index " + std::to_string(i) + " in " + path.string());
      }
      out.audio.samples[i] = static_cast<double>(v);
    }
  }
  return out;
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  return decode_wav(path).audio;
}

// PCM16 stores round(x * 32768) clamped to the int16 range, so 1.0 and above
// map to 32767 and -1.0 maps to -32768.
inline std::int16_t to_pcm16(double x) {
  const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, WavEncoding encoding) {
  using detail::store_u16;
  using detail::store_u32;
  if (buf.samples.empty()) throw Error(Errc::kEmptyAudio, "cannot encode an empty buffer");
  if (buf.sample_rate <= 0) {
    throw Error(Errc::kInvalidArgument, "sample_rate=" + std::to_string(buf.sample_rate));
  }
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t block_align = bits / 8;
  const std::uint64_t data_bytes = buf.samples.size() * block_align;
  if (data_bytes > std::numeric_limits<std::uint32_t>::max() - 36) {
    throw Error(Errc::kIoError, "audio too long for RIFF");
  }

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  const auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  store_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  tag("WAVE");
  tag("fmt ");
  store_u32(out, 16);
  store_u16(out, pcm ? 1 : 3);
  store_u16(out, 1);
  store_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  store_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * block_align);
  store_u16(out, static_cast<std::uint16_t>(block_align));
  store_u16(out, bits);
  tag("data");
  store_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (double x : buf.samples) {
    if (!std::isfinite(x)) throw Error(Errc::kInvalidArgument, "non-finite sample");
    if (pcm) {
      store_u16(out, static_cast<std::uint16_t>(to_pcm16(x)));
    } else {
      store_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                      WavEncoding encoding) {
  detail::write_file_bytes(path, encode_wav(buf, encoding));
}

// Tab-separated manifest: utt_id, path, key, attack. Blank lines are skipped.
inline std::vector<ManifestEntry> parse_manifest(std::string_view text,
                                                 const std::filesystem::path& origin = {}) {
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = detail::trim_cr(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (detail::is_blank(line)) continue;

    const auto fields = detail::split_tabs(line);
    if (fields.size() != 4) {
      throw Error(Errc::kParseError,
                  detail::line_error(origin, line_no,
                                     "expected 4 tab-separated fields, got " +
                                         std::to_string(fields.size())));
    }
    ManifestEntry e;
    e.utt_id = std::string(fields[0]);
    e.path = std::string(fields[1]);
    e.attack = std::string(fields[3]);
    if (e.utt_id.empty() || e.path.empty() || e.attack.empty()) {
      throw Error(Errc::kParseError, detail::line_error(origin, line_no, "empty field"));
    }
    if (fields[2] == "bonafide") {
      e.key = TrialKey::kBonafide;
      if (e.attack != "-") {
        throw Error(Errc::kParseError,
                    detail::line_error(origin, line_no, "bonafide entry must have attack '-'"));
      }
    } else if (fields[2] == "spoof") {
      e.key = TrialKey::kSpoof;
    } else {
      throw Error(Errc::kParseError,
                  detail::line_error(origin, line_no, "unknown key '" + std::string(fields[2]) + "'"));
    }
    if (!seen.insert(e.utt_id).second) {
      throw Error(Errc::kDuplicateId, detail::line_error(origin, line_no, e.utt_id));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                        path);
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.utt_id + '\t' + e.path + '\t' + std::string(key_name(e.key)) + '\t' + e.attack + '\n';
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestEntry>& entries) {
  const std::string text = format_manifest(entries);
  detail::write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// Feature file layout, all little-endian:
//   "RFB1" | u32 version=1 | u32 n_frames | u32 n_mels | f64 sample_rate |
//   u32 hop_length | u32 win_length | n_frames*n_mels f64 mel (frame-major) |
//   n_frames f64 f0
inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 4 + 4 + 4 + 8 + 4 + 4;

inline std::vector<std::uint8_t> encode_features(const FeatureBundle& bundle) {
  using detail::store_f64;
  using detail::store_u32;
  if (bundle.mel.rows() != bundle.f0.size()) {
    throw Error(Errc::kShapeMismatch, "mel has " + std::to_string(bundle.mel.rows()) +
                                          " frames, f0 has " + std::to_string(bundle.f0.size()));
  }
  std::vector<std::uint8_t> out{'R', 'F', 'B', '1'};
  out.reserve(kFeatureHeaderBytes + 8 * (bundle.mel.data().size() + bundle.f0.size()));
  store_u32(out, kFeatureFileVersion);
  store_u32(out, static_cast<std::uint32_t>(bundle.n_frames()));
  store_u32(out, static_cast<std::uint32_t>(bundle.n_mels()));
  store_f64(out, bundle.sample_rate);
  store_u32(out, bundle.hop_length);
  store_u32(out, bundle.win_length);
  for (double v : bundle.mel.data()) store_f64(out, v);
  for (double v : bundle.f0) store_f64(out, v);
  return out;
}

inline FeatureBundle decode_features(const std::vector<std::uint8_t>& bytes) {
  using detail::load_u32;
  using detail::load_u64;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "RFB1", 4) != 0) {
    throw Error(Errc::kBadMagic, "feature file does not start with RFB1");
  }
  if (bytes.size() < kFeatureHeaderBytes) {
    throw Error(Errc::kParseError, "feature file header truncated");
  }
  const std::uint8_t* p = bytes.data() + 4;
  const std::uint32_t version = load_u32(p);
  if (version != kFeatureFileVersion) {
    throw Error(Errc::kVersionMismatch, "version=" + std::to_string(version));
  }
  const std::uint64_t n_frames = load_u32(p + 4);
  const std::uint64_t n_mels = load_u32(p + 8);
  const std::uint64_t expected = kFeatureHeaderBytes + 8 * (n_frames * n_mels + n_frames);
  if (bytes.size() != expected) {
    throw Error(Errc::kParseError, "feature file size " + std::to_string(bytes.size()) +
                                       ", expected " + std::to_string(expected));
  }
  FeatureBundle bundle;
  bundle.sample_rate = std::bit_cast<double>(load_u64(p + 12));
  bundle.hop_length = load_u32(p + 20);
  bundle.win_length = load_u32(p + 24);
  p = bytes.data() + kFeatureHeaderBytes;
  std::vector<double> mel(n_frames * n_mels);
  for (auto& v : mel) {
    v = std::bit_cast<double>(load_u64(p));
    p += 8;
  }
  bundle.mel = MatrixD(n_frames, n_mels, std::move(mel));
  bundle.f0.resize(n_frames);
  for (auto& v : bundle.f0) {
    v = std::bit_cast<double>(load_u64(p));
    p += 8;
  }
  return bundle;
}

inline void write_features(const std::filesystem::path& path, const FeatureBundle& bundle) {
  detail::write_file_bytes(path, encode_features(bundle));
}

inline FeatureBundle read_features(const std::filesystem::path& path) {
  return decode_features(detail::read_file_bytes(path));
}

}  // namespace rhythmaug
