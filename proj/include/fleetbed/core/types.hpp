/*
 * Copyright (C) 2026 The Fleetbed Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "fleetbed/error.hpp"

namespace fleetbed {

/// Microseconds since the Unix epoch, UTC. Always carried as an integer;
/// nothing in the system is allowed to round-trip this through a float.
struct TimestampUs {
  std::int64_t us = 0;

  auto operator<=>(const TimestampUs&) const = default;
};

inline TimestampUs operator+(TimestampUs t, std::int64_t delta_us) {
  return TimestampUs{t.us + delta_us};
}

/// Stable device identity: SHA-256 of the device's MEID, 64 lowercase hex
/// characters.
struct DeviceId {
  std::string hex;

  auto operator<=>(const DeviceId&) const = default;

  static bool valid(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
  }

  static DeviceId parse(std::string_view s) {
    if (!valid(s)) raise(Errc::ParseError, "device: not 64 lowercase hex chars");
    return DeviceId{std::string(s)};
  }
};

/// logcat-style log priority.
enum class Level : char {
  Verbose = 'V',
  Debug = 'D',
  Info = 'I',
  Warning = 'W',
  Error = 'E',
};

inline char to_char(Level l) { return static_cast<char>(l); }

inline Level parse_level(std::string_view s) {
  if (s.size() == 1) {
    switch (s[0]) {
      case 'V': return Level::Verbose;
      case 'D': return Level::Debug;
      case 'I': return Level::Info;
      case 'W': return Level::Warning;
      case 'E': return Level::Error;
    }
  }
  raise(Errc::ParseError, "level: unknown level '" + std::string(s) + "'");
}

/// Log line label. Non-empty printable ASCII, no whitespace, at most 128
/// bytes. Owned instrumentation follows the Institution-Code-Detail
/// convention on top of this.
struct Tag {
  std::string name;

  auto operator<=>(const Tag&) const = default;

  static bool valid(std::string_view s) {
    if (s.empty() || s.size() > 128) return false;
    for (char c : s) {
      if (c < 0x21 || c > 0x7e) return false;  // excludes space and controls
    }
    return true;
  }

  static Tag parse(std::string_view s) {
    if (!valid(s)) raise(Errc::ParseError, "tag: '" + std::string(s) + "'");
    return Tag{std::string(s)};
  }
};

enum class TagCategory { PhoneLab, Experiments, Other };

constexpr const char* to_string(TagCategory c) {
  switch (c) {
    case TagCategory::PhoneLab: return "PhoneLab";
    case TagCategory::Experiments: return "Experiments";
    case TagCategory::Other: return "Other";
  }
  return "?";
}

inline TagCategory parse_tag_category(std::string_view s) {
  if (s == "PhoneLab") return TagCategory::PhoneLab;
  if (s == "Experiments") return TagCategory::Experiments;
  if (s == "Other") return TagCategory::Other;
  raise(Errc::ParseError, "category: '" + std::string(s) + "'");
}

/// Platform image identity: a monotonically increasing version number plus
/// the SHA-256 fingerprint of the image bytes.
struct ImageVersion {
  std::uint64_t version = 0;
  std::string fingerprint;  // 64 hex chars, empty until the image is built

  auto operator<=>(const ImageVersion&) const = default;
};

}  // namespace fleetbed
