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
#include "fleetbed/core/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace fleetbed {

static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t utc_day_index(TimestampUs t) { return floor_div(t.us, kUsPerDay); }

TimestampUs day_start(std::int64_t day_index) {
  return TimestampUs{day_index * kUsPerDay};
}

std::string day_index_string(std::int64_t day_index) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day_index}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

std::string utc_day_string(TimestampUs t) {
  return day_index_string(utc_day_index(t));
}

std::int64_t day_index_from_string(std::string_view ymd) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  if (ymd.size() != 10 ||
      std::sscanf(std::string(ymd).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) {
    raise(Errc::ParseError, "date: expected YYYY-MM-DD, got '" +
                                std::string(ymd) + "'");
  }
  year_month_day date{year{y}, month{m}, day{d}};
  if (!date.ok()) raise(Errc::ParseError, "date: invalid '" + std::string(ymd) + "'");
  return sys_days{date}.time_since_epoch().count();
}

std::int64_t local_seconds_of_day(TimestampUs now, std::int32_t local_offset_s) {
  std::int64_t local_s = floor_div(now.us, kUsPerSecond) + local_offset_s;
  std::int64_t s = local_s % 86'400;
  if (s < 0) s += 86'400;
  return s;
}

std::int64_t local_day_index(TimestampUs now, std::int32_t local_offset_s) {
  std::int64_t local_s = floor_div(now.us, kUsPerSecond) + local_offset_s;
  return floor_div(local_s, 86'400);
}

TimestampUs parse_timestamp(std::string_view s, const char* field) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    raise(Errc::ParseError,
          std::string(field) + ": not a non-negative integer: '" +
              std::string(s) + "'");
  }
  return TimestampUs{v};
}

}  // namespace fleetbed
