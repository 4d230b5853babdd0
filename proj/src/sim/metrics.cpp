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
#include "fleetbed/sim/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fleetbed/core/time.hpp"

namespace fleetbed::sim {

std::vector<DayActive> daily_active(
    std::span<const backend::HeartbeatEntry> ledger, std::size_t enrolled,
    std::int64_t first_day, std::int64_t last_day) {
  if (enrolled == 0) {
    raise(Errc::InvalidArgument, "undefined-ratio: zero enrolled devices");
  }
  std::map<std::int64_t, std::set<std::string>> active_by_day;
  for (const auto& e : ledger) {
    active_by_day[utc_day_index(e.received_at)].insert(e.device.hex);
  }
  std::vector<DayActive> out;
  for (std::int64_t d = first_day; d <= last_day; ++d) {
    DayActive day;
    day.day_index = d;
    day.date = day_index_string(d);
    auto it = active_by_day.find(d);
    day.active = it == active_by_day.end() ? 0 : it->second.size();
    day.enrolled = enrolled;
    day.ratio = static_cast<double>(day.active) / static_cast<double>(enrolled);
    out.push_back(std::move(day));
  }
  return out;
}

std::vector<DayActive> daily_active(
    std::span<const backend::HeartbeatEntry> ledger, std::size_t enrolled) {
  if (enrolled == 0) {
    raise(Errc::InvalidArgument, "undefined-ratio: zero enrolled devices");
  }
  if (ledger.empty()) return {};
  std::int64_t first = utc_day_index(ledger.front().received_at);
  std::int64_t last = first;
  for (const auto& e : ledger) {
    std::int64_t d = utc_day_index(e.received_at);
    first = std::min(first, d);
    last = std::max(last, d);
  }
  return daily_active(ledger, enrolled, first, last);
}

std::vector<CdfPoint> ratio_cdf(std::span<const double> series) {
  if (series.empty()) {
    raise(Errc::InvalidArgument, "cdf of an empty series");
  }
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> points;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!points.empty() && points.back().value == sorted[i]) {
      points.back().cumulative = (i + 1) / n;
    } else {
      points.push_back({sorted[i], (i + 1) / n});
    }
  }
  return points;
}

double cdf_eval(std::span<const CdfPoint> points, double x) {
  double cum = 0.0;
  for (const auto& p : points) {
    if (p.value > x) break;
    cum = p.cumulative;
  }
  return cum;
}

}  // namespace fleetbed::sim
