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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetbed/backend/backend.hpp"
#include "fleetbed/lifecycle/lifecycle.hpp"
#include "fleetbed/sim/metrics.hpp"

namespace fleetbed::sim {

/// Local-minute interval during which the device sits on a charger.
/// start_min > end_min wraps past midnight.
struct ChargeWindow {
  int start_min = 0;
  int end_min = 0;

  bool contains(std::int64_t minute_of_day) const {
    if (start_min <= end_min) {
      return minute_of_day >= start_min && minute_of_day < end_min;
    }
    return minute_of_day >= start_min || minute_of_day < end_min;
  }
};

/// Behavior model standing in for one participant.
struct DeviceProfile {
  std::string meid;
  double usage_prob = 1.0;  // daily probability the device is used at all
  std::vector<ChargeWindow> charging_windows{{1380, 420}};  // 23:00-07:00
  double interaction_rate_per_hour = 2.0;
  double network_uptime = 1.0;
  double log_rate_per_hour = 60.0;
  double ota_accept_prob = 1.0;
  std::vector<ExperimentKey> optout;
  bool developer = false;
  std::int32_t local_offset_s = 0;
  std::size_t buffer_capacity_bytes = 16u << 20;
  std::size_t max_line_bytes = 8u << 10;
};

struct ExperimentDecl {
  ExperimentKey key;
  std::string description;
};

/// Operator activity scheduled during the run.
struct ScriptStep {
  std::int64_t at_s = 0;  // seconds after simulation start
  std::string op;         // "transition" | "cut_release"
  std::string event;      // transition only
  std::vector<ExperimentKey> experiments;
  std::string cohort;     // cut_release only
};

struct FleetConfig {
  std::vector<DeviceProfile> profiles;
  int duration_days = 7;
  std::uint64_t seed = 1;
  int tick_s = 60;
  std::string start_date = "2016-01-04";
  double upload_retry_injection = 0.0;  // P(success response lost per upload)
  std::size_t image_bytes = 65'536;
  std::int64_t soak_hours = 72;
  bool record_actions = true;
  std::vector<ExperimentDecl> experiments;
  std::vector<ScriptStep> script;

  void validate() const;

  std::string to_json_string() const;
  static FleetConfig from_json_string(const std::string& text);
  static FleetConfig load(const std::filesystem::path& path);
};

struct LedgerTotals {
  std::uint64_t generated = 0;
  std::uint64_t device_dropped = 0;
  std::uint64_t optout_filtered = 0;
  std::uint64_t stored = 0;
  std::uint64_t duplicates_detected = 0;
  std::uint64_t injected_duplicates = 0;
  std::uint64_t malformed = 0;

  bool balanced() const {
    return generated == stored + device_dropped + optout_filtered;
  }
};

struct ActionLogEntry {
  std::int64_t t_us = 0;
  std::string device;
  std::string kind;
  nlohmann::ordered_json detail;
};

struct AdoptionDay {
  std::string date;
  std::map<std::uint64_t, std::uint64_t> devices_per_version;
};

struct SimReport {
  std::vector<DayActive> daily_active;
  LedgerTotals ledger;
  std::vector<AdoptionDay> adoption;
  std::map<std::uint64_t, std::int64_t> adoption_complete_us;
  std::map<std::string, std::uint64_t> generated_per_experiment;
  std::map<std::string, std::int64_t> last_generated_us;
  std::uint64_t heartbeats_recorded = 0;
  std::vector<ActionLogEntry> actions;

  nlohmann::ordered_json to_json() const;
  std::string to_json_string() const;
  /// `day,active,enrolled,ratio` rows for plotting.
  std::string daily_active_csv() const;
};

/// Deterministic tick-driven fleet run against a fresh backend rooted at
/// `store_root`. The backend and registry stay alive after run() so callers
/// can inspect or query the resulting store.
class Simulation {
 public:
  Simulation(FleetConfig config, std::filesystem::path store_root);
  ~Simulation();

  SimReport run();

  backend::Backend& backend();
  lifecycle::Registry& registry();
  const FleetConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper: run once, discard the world, keep the report.
SimReport run(FleetConfig config, const std::filesystem::path& store_root);

}  // namespace fleetbed::sim
