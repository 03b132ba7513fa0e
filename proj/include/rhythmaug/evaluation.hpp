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

// Equal error rate scoring, pooled and broken down per attack.
//
// Conventions: higher score = more bonafide. At threshold t a bonafide trial
// is rejected when score < t and a spoof trial is accepted when score >= t.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/error.hpp"

namespace rhythmaug {

struct ScoreRecord {
  std::string utt_id;
  TrialKey key = TrialKey::kBonafide;
  std::string attack = "-";
  double score = 0.0;
};

using ScoreSet = std::vector<ScoreRecord>;

// TSV: utt_id, key, attack, score.
inline ScoreSet parse_scores(std::string_view text, const std::filesystem::path& origin = {}) {
  ScoreSet scores;
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
    ScoreRecord rec;
    rec.utt_id = std::string(fields[0]);
    if (fields[1] == "bonafide") {
      rec.key = TrialKey::kBonafide;
    } else if (fields[1] == "spoof") {
      rec.key = TrialKey::kSpoof;
    } else {
      throw Error(Errc::kParseError, detail::line_error(origin, line_no,
                                                        "unknown key '" + std::string(fields[1]) + "'"));
    }
    rec.attack = std::string(fields[2]);
    const std::string score_text(fields[3]);
    std::size_t consumed = 0;
    try {
      rec.score = std::stod(score_text, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == 0 || consumed != score_text.size() || !std::isfinite(rec.score)) {
      throw Error(Errc::kParseError,
                  detail::line_error(origin, line_no, "bad score '" + score_text + "'"));
    }
    if (!seen.insert(rec.utt_id).second) {
      throw Error(Errc::kDuplicateId, detail::line_error(origin, line_no, rec.utt_id));
    }
    scores.push_back(std::move(rec));
  }
  return scores;
}

inline ScoreSet read_scores(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_scores(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                      path);
}

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// FRR(t) = #{bonafide < t}/Nb and FAR(t) = #{spoof >= t}/Ns are evaluated at
// every distinct score and at +inf. The EER is read off where FAR - FRR
// changes sign, interpolating linearly between the two bracketing
// thresholds.
inline EerResult compute_eer(std::span<const double> bonafide, std::span<const double> spoof) {
  if (bonafide.empty() || spoof.empty()) {
    throw Error(Errc::kInsufficientClasses,
                "EER needs at least one bonafide and one spoof trial (got " +
                    std::to_string(bonafide.size()) + " / " + std::to_string(spoof.size()) + ")");
  }
  std::vector<double> bona(bonafide.begin(), bonafide.end());
  std::vector<double> fake(spoof.begin(), spoof.end());
  std::sort(bona.begin(), bona.end());
  std::sort(fake.begin(), fake.end());
  std::vector<double> thresholds;
  thresholds.reserve(bona.size() + fake.size());
  std::merge(bona.begin(), bona.end(), fake.begin(), fake.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double nb = static_cast<double>(bona.size());
  const double ns = static_cast<double>(fake.size());
  std::size_t bona_below = 0;  // bonafide scores < t
  std::size_t fake_below = 0;  // spoof scores < t

  double prev_far = 1.0, prev_frr = 0.0, prev_t = thresholds.front();
  for (std::size_t j = 0; j <= thresholds.size(); ++j) {
    double far = 0.0, frr = 1.0, t = thresholds.back();
    if (j < thresholds.size()) {
      t = thresholds[j];
      while (bona_below < bona.size() && bona[bona_below] < t) ++bona_below;
      while (fake_below < fake.size() && fake[fake_below] < t) ++fake_below;
      frr = static_cast<double>(bona_below) / nb;
      far = static_cast<double>(fake.size() - fake_below) / ns;
    }
    const double diff = far - frr;
    if (diff == 0.0) return {far, t};
    if (diff < 0.0) {
      const double prev_diff = prev_far - prev_frr;
      const double alpha = prev_diff / (prev_diff - diff);
      return {prev_far + alpha * (far - prev_far), prev_t + alpha * (t - prev_t)};
    }
    prev_far = far;
    prev_frr = frr;
    prev_t = t;
  }
  // FAR - FRR is -1 at +inf, so the loop always returns.
  return {0.5, thresholds.back()};
}

inline EerResult compute_eer(const ScoreSet& scores) {
  std::vector<double> bona, fake;
  for (const auto& r : scores) (r.key == TrialKey::kBonafide ? bona : fake).push_back(r.score);
  return compute_eer(bona, fake);
}

enum class AttackGroup { kTts, kVc };

using AttackMapping = std::map<std::string, AttackGroup, std::less<>>;

// A07-A16 are TTS systems, A17-A19 voice conversion.
inline AttackMapping default_attack_mapping() {
  AttackMapping mapping;
  for (int id = 7; id <= 19; ++id) {
    char name[8];
    std::snprintf(name, sizeof(name), "A%02d", id);
    mapping.emplace(name, id <= 16 ? AttackGroup::kTts : AttackGroup::kVc);
  }
  return mapping;
}

// TSV lines: attack, group (TTS or VC).
inline AttackMapping parse_attack_mapping(std::string_view text,
                                          const std::filesystem::path& origin = {}) {
  AttackMapping mapping;
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
    if (fields.size() != 2 || fields[0].empty()) {
      throw Error(Errc::kParseError,
                  detail::line_error(origin, line_no, "expected 'attack<TAB>TTS|VC'"));
    }
    AttackGroup group;
    if (fields[1] == "TTS") {
      group = AttackGroup::kTts;
    } else if (fields[1] == "VC") {
      group = AttackGroup::kVc;
    } else {
      throw Error(Errc::kParseError, detail::line_error(origin, line_no,
                                                        "unknown group '" + std::string(fields[1]) + "'"));
    }
    mapping.insert_or_assign(std::string(fields[0]), group);
  }
  return mapping;
}

inline AttackMapping read_attack_mapping(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_attack_mapping(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path);
}

struct EerBreakdown {
  EerResult total;
  std::optional<EerResult> tts;
  std::optional<EerResult> vc;
  std::map<std::string, EerResult> per_attack;
  std::vector<std::string> unmapped_attacks;
};

// Every subset (one attack, one attack group, everything) is scored against
// the full bonafide set. Groups without spoof trials are left empty.
inline EerBreakdown eer_breakdown(const ScoreSet& scores, const AttackMapping& mapping,
                                  bool strict = false) {
  std::vector<double> bona;
  std::map<std::string, std::vector<double>> by_attack;
  for (const auto& r : scores) {
    if (r.key == TrialKey::kBonafide) {
      bona.push_back(r.score);
    } else {
      by_attack[r.attack].push_back(r.score);
    }
  }

  EerBreakdown out;
  std::vector<double> all_spoof, tts, vc;
  for (const auto& [attack, values] : by_attack) {
    const auto it = mapping.find(attack);
    if (it == mapping.end()) {
      if (strict) throw Error(Errc::kUnknownAttack, attack);
      out.unmapped_attacks.push_back(attack);
    } else {
      auto& group = it->second == AttackGroup::kTts ? tts : vc;
      group.insert(group.end(), values.begin(), values.end());
    }
    all_spoof.insert(all_spoof.end(), values.begin(), values.end());
    out.per_attack.emplace(attack, compute_eer(bona, values));
  }
  out.total = compute_eer(bona, all_spoof);
  if (!tts.empty()) out.tts = compute_eer(bona, tts);
  if (!vc.empty()) out.vc = compute_eer(bona, vc);
  return out;
}

// EER as a percentage rounded to two decimals.
inline double eer_percent(const EerResult& r) { return std::round(r.eer * 10000.0) / 100.0; }

inline nlohmann::json breakdown_to_json(const EerBreakdown& b) {
  nlohmann::json per_attack = nlohmann::json::object();
  for (const auto& [attack, r] : b.per_attack) per_attack[attack] = eer_percent(r);
  const auto optional_percent = [](const std::optional<EerResult>& r) {
    return r ? nlohmann::json(eer_percent(*r)) : nlohmann::json(nullptr);
  };
  return {{"total", eer_percent(b.total)},
          {"tts", optional_percent(b.tts)},
          {"vc", optional_percent(b.vc)},
          {"per_attack", std::move(per_attack)}};
}

// One header row of condition names and one row of EER(%) values.
inline std::string format_breakdown(const EerBreakdown& b) {
  std::vector<std::pair<std::string, std::string>> columns;
  const auto cell = [](const std::optional<EerResult>& r) {
    if (!r) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << eer_percent(*r);
    return os.str();
  };
  for (const auto& [attack, r] : b.per_attack) columns.emplace_back(attack, cell(r));
  columns.emplace_back("TTS", cell(b.tts));
  columns.emplace_back("VC", cell(b.vc));
  columns.emplace_back("Total", cell(b.total));

  const std::string label = "EER(%)";
  std::ostringstream head, body;
  head << std::left << std::setw(static_cast<int>(label.size())) << "";
  body << label;
  for (const auto& [name, value] : columns) {
    const int width = static_cast<int>(std::max(name.size(), value.size())) + 2;
    head << std::right << std::setw(width) << name;
    body << std::right << std::setw(width) << value;
  }
  return head.str() + "\n" + body.str() + "\n";
}

}  // namespace rhythmaug
