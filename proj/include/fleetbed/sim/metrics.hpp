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

#include <span>
#include <string>
#include <vector>

#include "fleetbed/backend/backend.hpp"

namespace fleetbed::sim {

struct DayActive {
  std::int64_t day_index = 0;
  std::string date;
  std::uint64_t active = 0;
  std::uint64_t enrolled = 0;
  double ratio = 0.0;
};

/// A device is active on a UTC day iff at least one of its heartbeats was
/// received that day. Ratio is active/enrolled. Throws for zero enrolled
/// devices (the ratio is undefined).
std::vector<DayActive> daily_active(
    std::span<const backend::HeartbeatEntry> ledger, std::size_t enrolled,
    std::int64_t first_day, std::int64_t last_day);

/// Span inferred from the ledger itself (empty ledger yields no days).
std::vector<DayActive> daily_active(
    std::span<const backend::HeartbeatEntry> ledger, std::size_t enrolled);

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

/// Empirical CDF of a ratio series: one point per distinct value, cumulative
/// fraction of days at or below it. Nondecreasing, ends at 1.
std::vector<CdfPoint> ratio_cdf(std::span<const double> series);

/// Evaluates the step function at x (fraction of days with value <= x).
double cdf_eval(std::span<const CdfPoint> points, double x);

}  // namespace fleetbed::sim
