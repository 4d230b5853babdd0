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

#include <cstdint>
#include <string>

#include "fleetbed/core/types.hpp"

namespace fleetbed {

constexpr std::int64_t kUsPerSecond = 1'000'000;
constexpr std::int64_t kUsPerDay = 86'400 * kUsPerSecond;

/// Days since the Unix epoch for the UTC calendar day containing `t`.
std::int64_t utc_day_index(TimestampUs t);

TimestampUs day_start(std::int64_t day_index);

/// "YYYY-MM-DD" for the UTC day containing `t`.
std::string utc_day_string(TimestampUs t);
std::string day_index_string(std::int64_t day_index);
std::int64_t day_index_from_string(std::string_view ymd);

/// Seconds since local midnight for a device at fixed UTC offset
/// `local_offset_s`.
std::int64_t local_seconds_of_day(TimestampUs now, std::int32_t local_offset_s);

/// Local calendar day index (used for once-per-day bookkeeping like OTA
/// prompts).
std::int64_t local_day_index(TimestampUs now, std::int32_t local_offset_s);

TimestampUs parse_timestamp(std::string_view s, const char* field);

}  // namespace fleetbed
