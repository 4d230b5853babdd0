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
#include <string_view>
#include <vector>

#include "fleetbed/core/types.hpp"

namespace fleetbed {

/// The five fields a device emits per log line. The backend attaches the
/// device identity and upload time at ingest; the canonical six-field record
/// only exists server-side.
struct DeviceRecord {
  TimestampUs timestamp;
  std::uint64_t task_id = 0;
  Level level = Level::Info;
  Tag tag;
  std::string message;  // raw bytes; tabs/newlines are escaped on the wire

  bool operator==(const DeviceRecord&) const = default;
};

/// Canonical six-field record as stored in the dataset.
struct LogRecord {
  DeviceId device;
  TimestampUs timestamp;
  std::uint64_t task_id = 0;
  Level level = Level::Info;
  Tag tag;
  std::string message;

  bool operator==(const LogRecord&) const = default;

  DeviceRecord fields() const {
    return DeviceRecord{timestamp, task_id, level, tag, message};
  }
  static LogRecord from(const DeviceId& d, const DeviceRecord& r) {
    return LogRecord{d, r.timestamp, r.task_id, r.level, r.tag, r.message};
  }
};

/// A record plus ingest metadata. `seq` is the device's producer sequence
/// number; it orders and deduplicates records but is not part of the
/// flat-file grammar (the store keeps it in a sidecar).
struct StoredRecord {
  LogRecord record;
  TimestampUs upload_time;
  std::uint64_t seq = 0;

  bool operator==(const StoredRecord&) const = default;
};

// Message escaping on the wire: '\' -> "\\", TAB -> "\t", LF -> "\n".
std::string escape_message(std::string_view raw);
std::string unescape_message(std::string_view escaped);

/// One device-file line, tab separated, without the trailing newline:
/// timestamp_us TAB task_id TAB level TAB tag TAB message
std::string format_device_line(const DeviceRecord& r);
DeviceRecord parse_device_line(std::string_view line);

/// One stored/query line:
/// device_id TAB upload_time_us TAB timestamp_us TAB task_id TAB level TAB
/// tag TAB message
std::string format_stored_line(const StoredRecord& r);
/// Parses the seven-column form. `seq` is not on the wire; the caller
/// supplies it (0 if unknown).
StoredRecord parse_stored_line(std::string_view line, std::uint64_t seq = 0);

/// Whole-file helpers. Files are a concatenation of '\n'-terminated lines.
std::string format_device_file(const std::vector<DeviceRecord>& records);
std::vector<DeviceRecord> parse_device_file(std::string_view bytes);

std::uint64_t parse_u64(std::string_view s, const char* field);

}  // namespace fleetbed
