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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fleetbed/agent/agent.hpp"
#include "fleetbed/backend/query.hpp"
#include "fleetbed/core/record.hpp"
#include "fleetbed/lifecycle/lifecycle.hpp"
#include "fleetbed/ota/ota.hpp"

namespace fleetbed::backend {

/// One uploaded rotated file plus the metadata the server needs to turn its
/// lines into stored records. Records in the file carry sequence numbers
/// first_seq, first_seq+1, ... in order.
struct UploadEnvelope {
  DeviceId device;
  std::uint64_t first_seq = 0;
  std::string file_bytes;
  TimestampUs received_at;
  bool gzipped = false;
};

struct IngestReport {
  std::uint64_t accepted = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t malformed = 0;  // seq collisions whose content disagrees
  std::uint64_t bytes_stored = 0;

  std::string to_json_string() const;
  static IngestReport from_json_string(std::string_view body);
};

struct HeartbeatEntry {
  DeviceId device;
  TimestampUs sent_at;
  TimestampUs received_at;
  agent::HeartbeatReport report;
};

struct TagStatsRow {
  std::uint64_t tag_count = 0;
  std::uint64_t line_count = 0;
};

/// Table-shaped dataset overview: one row per category plus the total.
struct TagStats {
  TagStatsRow phonelab;
  TagStatsRow experiments;
  TagStatsRow other;
  TagStatsRow total;

  std::string to_json_string() const;
};

/// Ingestion service and dataset store. Uploads become one flat file per
/// device per UTC day under `<root>/store/<device>/<YYYY-MM-DD>.log`,
/// with producer sequence numbers kept in a parallel `.seq` sidecar (they
/// are not part of the flat-file grammar). All state is mirrored in memory
/// and written through, so a fresh process picks up where the last left off.
class Backend {
 public:
  struct Options {
    std::filesystem::path root;
    bool gzip_files = false;
    int history_depth = 3;  // incremental packages reach this many versions back
  };

  explicit Backend(Options opts,
                   const lifecycle::Registry* lifecycle = nullptr);

  // --- enrollment ----------------------------------------------------------
  void enroll(const DeviceId& device, bool developer = false);
  bool enrolled(const DeviceId& device) const;
  bool is_developer(const DeviceId& device) const;
  std::vector<DeviceId> devices() const;
  std::size_t enrolled_count() const;

  // --- ingest --------------------------------------------------------------
  /// All-or-nothing: an unparsable file or unknown device rejects the whole
  /// envelope (throws). Per-record outcomes land in the report.
  IngestReport ingest(const UploadEnvelope& envelope);

  // --- query ---------------------------------------------------------------
  /// Matching records ordered by (timestamp, device, seq).
  std::vector<StoredRecord> query(const QueryRequest& req) const;

  TagStats tag_stats() const;

  // --- heartbeats ------------------------------------------------------------
  void record_heartbeat(const agent::HeartbeatReport& report,
                        TimestampUs received_at);
  std::vector<HeartbeatEntry> heartbeats() const;

  // --- platform images / OTA -------------------------------------------------
  void add_image(ota::Image image);
  const ota::Image* image(std::uint64_t version) const;
  std::optional<std::uint64_t> latest_image_version() const;

  /// Cheap check: newest version this device may move to, or nothing when
  /// it is up to date.
  std::optional<std::uint64_t> ota_available_for(
      const DeviceId& device, std::uint64_t current_version) const;

  /// The package that brings `current_version` to the newest release this
  /// device may see (developer cohort only for enrolled developers).
  /// Nothing when already up to date. Devices more than history_depth
  /// versions behind get a full-image package.
  std::optional<ota::UpdatePackage> ota_package_for(
      const DeviceId& device, std::uint64_t current_version) const;

  // --- audits / ledger -------------------------------------------------------
  /// Stored records with timestamp >= `since` whose tag belongs to a
  /// registered experiment that was not live (Staged/Deployed/Merged) at
  /// that timestamp. Requires a lifecycle registry; audit only, nothing is
  /// dropped.
  std::uint64_t audit_namespace_violations(TimestampUs since) const;

  struct Totals {
    std::uint64_t accepted = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t malformed = 0;
    std::uint64_t bytes_stored = 0;
    std::uint64_t envelopes = 0;
    std::uint64_t envelopes_rejected = 0;
  };
  Totals totals() const;

  std::uint64_t stored_record_count() const;
  const std::filesystem::path& root() const { return opts_.root; }

 private:
  struct DayBucket {
    std::vector<StoredRecord> records;  // sorted by (timestamp, seq)
  };
  struct DeviceStore {
    std::map<std::int64_t, DayBucket> days;
    std::unordered_map<std::uint64_t, std::int64_t> seq_day;
  };

  DeviceStore& load_device(const std::string& hex) const;
  void write_day_file(const std::string& hex, std::int64_t day,
                      const DayBucket& bucket) const;
  std::filesystem::path device_dir(const std::string& hex) const;
  void save_devices() const;
  void append_heartbeat_line(const HeartbeatEntry& e) const;
  std::uint64_t target_version_for(const DeviceId& device) const;
  const StoredRecord* find_by_seq(const DeviceStore& ds, std::uint64_t seq) const;

  Options opts_;
  const lifecycle::Registry* lifecycle_;

  mutable std::mutex mu_;
  std::map<std::string, bool> enrolled_;  // device hex -> developer flag
  mutable std::map<std::string, DeviceStore> store_;
  std::vector<HeartbeatEntry> heartbeats_;
  std::map<std::uint64_t, ota::Image> images_;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, ota::UpdatePackage>
      package_cache_;
  Totals totals_;
};

}  // namespace fleetbed::backend
