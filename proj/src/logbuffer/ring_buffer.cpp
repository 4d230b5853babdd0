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
#include "fleetbed/logbuffer/ring_buffer.hpp"

#include <cstdio>

namespace fleetbed {

RingBuffer::RingBuffer(Options opts) : opts_(opts) {
  if (opts_.capacity_bytes == 0 || opts_.max_line_bytes == 0) {
    raise(Errc::InvalidArgument, "ring buffer sizes must be positive");
  }
}

static std::size_t encoded_size(const DeviceRecord& r) {
  return format_device_line(r).size() + 1;  // trailing newline
}

void RingBuffer::evict_oldest() {
  const Entry& e = entries_.front();
  buffered_bytes_ -= e.encoded_bytes;
  dropped_bytes_ += e.encoded_bytes;
  ++dropped_count_;
  entries_.pop_front();
}

AppendResult RingBuffer::append(LogSource source, DeviceRecord record) {
  ++total_appends_;

  switch (source) {
    case LogSource::Kernel: record.tag = Tag{"Kernel"}; break;
    case LogSource::KTrace: record.tag = Tag{"Kernel-Trace"}; break;
    default: break;
  }

  AppendStatus status = AppendStatus::Stored;
  if (record.message.size() > opts_.max_line_bytes) {
    record.message.resize(opts_.max_line_bytes - 1);
    record.message += kTruncationMarker;
    status = AppendStatus::Truncated;
  }

  std::size_t bytes = encoded_size(record);
  if (bytes > opts_.capacity_bytes) {
    ++dropped_count_;
    dropped_bytes_ += bytes;
    return {AppendStatus::Rejected, 0};
  }

  while (buffered_bytes_ + bytes > opts_.capacity_bytes) {
    evict_oldest();
  }

  std::uint64_t seq = next_seq_++;
  entries_.push_back(Entry{seq, std::move(record), bytes});
  buffered_bytes_ += bytes;
  return {status, seq};
}

RotatedFile RingBuffer::drain(std::size_t max_bytes) {
  if (max_bytes == 0) raise(Errc::InvalidArgument, "drain max_bytes must be > 0");

  RotatedFile file;
  std::size_t used = 0;
  while (!entries_.empty()) {
    const Entry& e = entries_.front();
    if (used + e.encoded_bytes > max_bytes) break;
    if (file.record_count == 0) file.first_seq = e.seq;
    file.last_seq = e.seq;
    file.content += format_device_line(e.record);
    file.content.push_back('\n');
    used += e.encoded_bytes;
    buffered_bytes_ -= e.encoded_bytes;
    ++file.record_count;
    ++drained_records_;
    entries_.pop_front();
  }

  char name[40];
  std::snprintf(name, sizeof(name), "seg-%016llu.log",
                static_cast<unsigned long long>(file.first_seq));
  file.name = name;
  return file;
}

std::optional<TimestampUs> RingBuffer::oldest_timestamp() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.front().record.timestamp;
}

}  // namespace fleetbed
