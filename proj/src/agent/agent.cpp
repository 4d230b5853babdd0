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
#include "fleetbed/agent/agent.hpp"

#include <nlohmann/json.hpp>

#include "fleetbed/core/time.hpp"

namespace fleetbed::agent {

using nlohmann::json;

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::SendHeartbeat: return "SendHeartbeat";
    case ActionKind::UploadFile: return "UploadFile";
    case ActionKind::CheckOta: return "CheckOta";
    case ActionKind::DownloadOta: return "DownloadOta";
    case ActionKind::PromptUser: return "PromptUser";
    case ActionKind::ApplyOta: return "ApplyOta";
    case ActionKind::Nothing: return "Nothing";
  }
  return "?";
}

std::uint64_t AgentState::outbox_bytes() const {
  std::uint64_t n = 0;
  for (const auto& f : outbox) n += f.byte_size();
  return n;
}

bool package_usable(const AgentState& state) {
  if (!state.pending_ota) return false;
  const auto& pkg = *state.pending_ota;
  if (pkg.target_version <= state.platform_version.version) return false;
  return pkg.is_full() ||
         pkg.base_version == state.platform_version.version;
}

bool discard_stale_package(AgentState& state) {
  if (state.pending_ota && !package_usable(state)) {
    state.pending_ota.reset();
    state.ota_prompt_declined_until.reset();
    state.last_prompt_local_day.reset();
    return true;
  }
  return false;
}

bool should_apply_ota(const AgentState& state, const DeviceEnv& env) {
  if (!package_usable(state)) return false;
  if (!env.charging) return false;
  std::int64_t minute = local_seconds_of_day(env.now, env.local_offset_s) / 60;
  if (minute < state.policy.apply_window_start_min ||
      minute >= state.policy.apply_window_end_min) {
    return false;
  }
  std::int64_t idle_s = (env.now.us - env.last_interaction.us) / kUsPerSecond;
  return idle_s >= state.policy.idle_threshold_s;
}

static bool heartbeat_due(const AgentState& s, const DeviceEnv& env) {
  if (!s.last_heartbeat_at) return true;
  return env.now.us - s.last_heartbeat_at->us >=
         s.policy.heartbeat_interval_s * kUsPerSecond;
}

static bool ota_check_due(const AgentState& s, const DeviceEnv& env) {
  if (!s.last_ota_check_at) return true;
  return env.now.us - s.last_ota_check_at->us >=
         s.policy.ota_check_interval_s * kUsPerSecond;
}

static bool upload_wanted(const AgentState& s, const DeviceEnv& env) {
  if (!env.charging || !env.network_up) return false;
  if (env.now < s.upload_blocked_until) return false;
  if (!s.outbox.empty()) return true;  // already rotated, push it out
  std::uint64_t pending = s.outbox_bytes() + s.buffer.buffered_bytes();
  if (pending == 0) return false;
  if (pending >= s.policy.upload_min_bytes) return true;
  if (auto oldest = s.buffer.oldest_timestamp()) {
    std::int64_t age_s = (env.now.us - oldest->us) / kUsPerSecond;
    if (age_s >= s.policy.upload_max_age_s) return true;
  }
  return false;
}

std::vector<Action> on_tick(const AgentState& state, const DeviceEnv& env) {
  std::vector<Action> actions;

  if (heartbeat_due(state, env)) {
    actions.push_back({ActionKind::SendHeartbeat});
  }

  if (env.network_up && ota_check_due(state, env)) {
    actions.push_back({ActionKind::CheckOta});
  }

  if (env.network_up && state.available_target &&
      *state.available_target > state.platform_version.version &&
      (!state.pending_ota ||
       state.pending_ota->target_version < *state.available_target)) {
    actions.push_back({ActionKind::DownloadOta});
  }

  if (package_usable(state)) {
    bool declined = state.ota_prompt_declined_until &&
                    env.now < *state.ota_prompt_declined_until;
    std::int64_t today = local_day_index(env.now, env.local_offset_s);
    bool prompted_today =
        state.last_prompt_local_day && *state.last_prompt_local_day == today;
    if (!declined && !prompted_today) {
      actions.push_back({ActionKind::PromptUser});
    }
  }

  if (should_apply_ota(state, env)) {
    actions.push_back({ActionKind::ApplyOta});
  }

  if (upload_wanted(state, env)) {
    actions.push_back({ActionKind::UploadFile});
  }

  return actions;
}

std::vector<DeviceRecord> filter_optout(std::vector<DeviceRecord> records,
                                        const std::set<ExperimentKey>& optout,
                                        const TagRegistry& registry,
                                        std::uint64_t* removed) {
  if (optout.empty()) {
    if (removed) *removed = 0;
    return records;
  }
  std::vector<DeviceRecord> out;
  out.reserve(records.size());
  std::uint64_t dropped = 0;
  for (auto& r : records) {
    auto key = registry.resolve(r.tag);
    if (key && optout.count(*key)) {
      ++dropped;
    } else {
      out.push_back(std::move(r));
    }
  }
  if (removed) *removed = dropped;
  return out;
}

HeartbeatReport build_heartbeat(const AgentState& state, const DeviceEnv& env) {
  HeartbeatReport hb;
  hb.device = state.device;
  hb.sent_at = env.now;
  hb.agent_version = state.agent_version;
  hb.platform_version = state.platform_version;
  hb.battery_pct = env.battery_pct;
  hb.charging = env.charging;
  hb.buffered_bytes = state.buffer.buffered_bytes();
  hb.outbox_bytes = state.outbox_bytes();
  hb.dropped_count = state.buffer.dropped_count();
  if (package_usable(state)) {
    hb.pending_ota_target = state.pending_ota->target_version;
  }
  return hb;
}

std::string HeartbeatReport::to_json_string() const {
  json j;
  j["device"] = device.hex;
  j["sent_at"] = sent_at.us;
  j["agent_version"] = agent_version;
  j["platform_version"] = {{"version", platform_version.version},
                           {"fingerprint", platform_version.fingerprint}};
  j["battery_pct"] = battery_pct;
  j["charging"] = charging;
  j["buffered_bytes"] = buffered_bytes;
  j["outbox_bytes"] = outbox_bytes;
  j["dropped_count"] = dropped_count;
  if (pending_ota_target) {
    j["pending_ota_target"] = *pending_ota_target;
  } else {
    j["pending_ota_target"] = nullptr;
  }
  return j.dump();
}

HeartbeatReport HeartbeatReport::from_json_string(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("heartbeat: ") + e.what());
  }
  try {
    HeartbeatReport hb;
    hb.device = DeviceId::parse(j.at("device").get<std::string>());
    hb.sent_at = TimestampUs{j.at("sent_at").get<std::int64_t>()};
    hb.agent_version = j.at("agent_version").get<std::string>();
    hb.platform_version.version =
        j.at("platform_version").at("version").get<std::uint64_t>();
    hb.platform_version.fingerprint =
        j.at("platform_version").value("fingerprint", "");
    hb.battery_pct = j.at("battery_pct").get<int>();
    hb.charging = j.at("charging").get<bool>();
    hb.buffered_bytes = j.at("buffered_bytes").get<std::uint64_t>();
    hb.outbox_bytes = j.at("outbox_bytes").get<std::uint64_t>();
    hb.dropped_count = j.at("dropped_count").get<std::uint64_t>();
    if (j.contains("pending_ota_target") && !j["pending_ota_target"].is_null()) {
      hb.pending_ota_target = j["pending_ota_target"].get<std::uint64_t>();
    }
    return hb;
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("heartbeat: ") + e.what());
  }
}

void note_heartbeat_sent(AgentState& state, TimestampUs now) {
  state.last_heartbeat_at = now;
}

void note_ota_checked(AgentState& state, TimestampUs now,
                      std::optional<std::uint64_t> available) {
  state.last_ota_check_at = now;
  state.available_target = available;
}

void note_download(AgentState& state, ota::UpdatePackage pkg) {
  state.pending_ota = std::move(pkg);
  state.ota_prompt_declined_until.reset();
  state.last_prompt_local_day.reset();
}

void note_prompted(AgentState& state, const DeviceEnv& env, bool accepted) {
  state.last_prompt_local_day = local_day_index(env.now, env.local_offset_s);
  if (!accepted) {
    // Postpone prompting until the next local day; the deferred-apply window
    // still installs it overnight.
    std::int64_t day = local_day_index(env.now, env.local_offset_s);
    std::int64_t next_midnight_s =
        (day + 1) * 86'400 - env.local_offset_s;
    state.ota_prompt_declined_until = TimestampUs{next_midnight_s * kUsPerSecond};
  }
}

void note_applied(AgentState& state, ImageVersion new_version) {
  state.platform_version = std::move(new_version);
  state.pending_ota.reset();
  state.available_target.reset();
  state.ota_prompt_declined_until.reset();
  state.last_prompt_local_day.reset();
}

void note_upload_ok(AgentState& state) {
  state.retry_backoff_s = 0;
  state.upload_blocked_until = TimestampUs{0};
}

void note_upload_failed(AgentState& state, TimestampUs now) {
  if (state.retry_backoff_s == 0) {
    state.retry_backoff_s = state.policy.backoff_base_s;
  } else {
    state.retry_backoff_s =
        std::min(state.retry_backoff_s * 2, state.policy.backoff_cap_s);
  }
  state.upload_blocked_until = now + state.retry_backoff_s * kUsPerSecond;
}

}  // namespace fleetbed::agent
