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
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleetbed/core/tags.hpp"
#include "fleetbed/core/types.hpp"
#include "fleetbed/logbuffer/ring_buffer.hpp"
#include "fleetbed/ota/ota.hpp"

namespace fleetbed::agent {

/// Snapshot of the device's world at one tick.
struct DeviceEnv {
  TimestampUs now;
  std::int32_t local_offset_s = 0;  // fixed UTC offset of the device
  bool charging = false;
  bool network_up = false;
  TimestampUs last_interaction;
  int battery_pct = 100;
};

/// Conductor policy knobs. The window/charging/idle conditions gate the
/// deferred OTA apply; everything else paces heartbeats, checks and uploads.
struct AgentPolicy {
  std::int64_t heartbeat_interval_s = 900;
  std::int64_t ota_check_interval_s = 21'600;
  std::size_t upload_min_bytes = 65'536;
  std::int64_t upload_max_age_s = 21'600;
  std::int64_t apply_window_start_min = 0;    // local minutes, inclusive
  std::int64_t apply_window_end_min = 300;    // exclusive (05:00)
  std::int64_t idle_threshold_s = 1'800;
  std::int64_t backoff_base_s = 60;
  std::int64_t backoff_cap_s = 3'600;
  std::size_t max_upload_file_bytes = 262'144;
};

enum class ActionKind {
  SendHeartbeat,
  UploadFile,
  CheckOta,
  DownloadOta,
  PromptUser,
  ApplyOta,
  Nothing,
};

const char* to_string(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::Nothing;
};

/// Periodic device status pushed to the backend.
struct HeartbeatReport {
  DeviceId device;
  TimestampUs sent_at;
  std::string agent_version;
  ImageVersion platform_version;
  int battery_pct = 0;
  bool charging = false;
  std::uint64_t buffered_bytes = 0;
  std::uint64_t outbox_bytes = 0;
  std::uint64_t dropped_count = 0;
  std::optional<std::uint64_t> pending_ota_target;

  std::string to_json_string() const;
  static HeartbeatReport from_json_string(std::string_view body);
};

/// Everything one conductor instance carries between ticks.
struct AgentState {
  DeviceId device;
  std::string agent_version = "conductor/1.0";
  ImageVersion platform_version;
  RingBuffer buffer;
  std::deque<RotatedFile> outbox;
  std::optional<ota::UpdatePackage> pending_ota;
  std::optional<std::uint64_t> available_target;  // announced by last check
  std::optional<TimestampUs> ota_prompt_declined_until;
  std::optional<std::int64_t> last_prompt_local_day;
  std::set<ExperimentKey> optout;
  AgentPolicy policy;

  std::int64_t retry_backoff_s = 0;  // 0 = no failed upload outstanding
  TimestampUs upload_blocked_until{0};
  std::optional<TimestampUs> last_heartbeat_at;
  std::optional<TimestampUs> last_ota_check_at;
  std::uint64_t optout_filtered = 0;

  std::uint64_t outbox_bytes() const;

  explicit AgentState(RingBuffer::Options buffer_opts = {})
      : buffer(buffer_opts) {}
};

/// A pending package is usable only if it applies to the current platform
/// version (full packages always do) and actually moves it forward.
bool package_usable(const AgentState& state);

/// Drops a pending package whose base no longer matches the platform.
/// Returns true when something was discarded. Run once per tick before
/// deciding actions.
bool discard_stale_package(AgentState& state);

/// Deferred-apply gate: pending package, local time inside the apply
/// window, on the charger, and idle long enough.
bool should_apply_ota(const AgentState& state, const DeviceEnv& env);

/// Pure decision function: what the conductor wants to do this tick.
/// Executing the actions (and recording their outcomes via the note_*
/// helpers) is the runtime's job.
std::vector<Action> on_tick(const AgentState& state, const DeviceEnv& env);

/// Removes records belonging to opted-out experiments. Survivor order is
/// preserved; `removed` (if given) receives the number filtered out.
std::vector<DeviceRecord> filter_optout(std::vector<DeviceRecord> records,
                                        const std::set<ExperimentKey>& optout,
                                        const TagRegistry& registry,
                                        std::uint64_t* removed = nullptr);

HeartbeatReport build_heartbeat(const AgentState& state, const DeviceEnv& env);

// Outcome notes, applied by the runtime after performing an action.
void note_heartbeat_sent(AgentState& state, TimestampUs now);
void note_ota_checked(AgentState& state, TimestampUs now,
                      std::optional<std::uint64_t> available);
void note_download(AgentState& state, ota::UpdatePackage pkg);
void note_prompted(AgentState& state, const DeviceEnv& env, bool accepted);
void note_applied(AgentState& state, ImageVersion new_version);
void note_upload_ok(AgentState& state);
void note_upload_failed(AgentState& state, TimestampUs now);

}  // namespace fleetbed::agent
