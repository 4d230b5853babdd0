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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "fleetbed/core/record.hpp"

namespace fleetbed {

/// Where a log line came from. Kernel sources get their tag forced so the
/// dataset keeps the usual Kernel / Kernel-Trace labels.
enum class LogSource { App, Framework, Kernel, KTrace };

enum class AppendStatus {
  Stored,     // entry buffered as-is
  Truncated,  // message cut to max_line_bytes-1 plus the truncation marker
  Rejected,   // could not fit even in an empty buffer; counted as dropped
};

struct AppendResult {
  AppendStatus status = AppendStatus::Stored;
  std::uint64_t seq = 0;  // unset for Rejected (no sequence consumed)
};

/// One drained segment, ready for upload. Content is the device-file
/// grammar; records are sequence-contiguous (first_seq..last_seq) and in
/// order.
struct RotatedFile {
  std::string name;
  std::string content;
  std::uint64_t first_seq = 0;
  std::uint64_t last_seq = 0;
  std::size_t record_count = 0;

  std::size_t byte_size() const { return content.size(); }
};

/// Device-side in-memory log sink: a byte-capped FIFO of encoded log lines.
/// When full the oldest whole entries are evicted (and counted); oversize
/// messages are truncated rather than split across entries.
///
/// Single writer, single drainer; callers serialize externally.
class RingBuffer {
 public:
  struct Options {
    std::size_t capacity_bytes = 16u << 20;  // 16 MiB
    std::size_t max_line_bytes = 8u << 10;   // 8 KiB
  };

  explicit RingBuffer(Options opts = {});

  AppendResult append(LogSource source, DeviceRecord record);

  /// Removes the oldest prefix of entries whose encoded size fits in
  /// `max_bytes` and returns it as a rotated file. Empty buffer yields an
  /// empty file.
  RotatedFile drain(std::size_t max_bytes);

  std::size_t buffered_bytes() const { return buffered_bytes_; }
  std::size_t buffered_records() const { return entries_.size(); }
  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t total_appends() const { return total_appends_; }
  std::uint64_t dropped_count() const { return dropped_count_; }
  std::uint64_t dropped_bytes() const { return dropped_bytes_; }
  std::uint64_t drained_records() const { return drained_records_; }
  std::optional<TimestampUs> oldest_timestamp() const;

  const Options& options() const { return opts_; }

  /// Marker appended to truncated messages (U+2026, three bytes).
  static constexpr const char* kTruncationMarker = "\xe2\x80\xa6";

 private:
  struct Entry {
    std::uint64_t seq;
    DeviceRecord record;
    std::size_t encoded_bytes;  // formatted line plus newline
  };

  void evict_oldest();

  Options opts_;
  std::deque<Entry> entries_;
  std::size_t buffered_bytes_ = 0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t total_appends_ = 0;
  std::uint64_t dropped_count_ = 0;
  std::uint64_t dropped_bytes_ = 0;
  std::uint64_t drained_records_ = 0;
};

}  // namespace fleetbed
