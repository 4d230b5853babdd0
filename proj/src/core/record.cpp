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
#include "fleetbed/core/record.hpp"

#include <charconv>

#include "fleetbed/core/time.hpp"

namespace fleetbed {

std::string escape_message(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_message(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c == '\t' || c == '\n') {
      raise(Errc::ParseError, "message: raw tab/newline in field");
    }
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= escaped.size()) {
      raise(Errc::ParseError, "message: dangling escape at end of field");
    }
    char e = escaped[++i];
    switch (e) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      default:
        raise(Errc::ParseError,
              std::string("message: unknown escape '\\") + e + "'");
    }
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s, const char* field) {
  std::uint64_t v = 0;
  if (s.empty() || s[0] == '-' || s[0] == '+') {
    raise(Errc::ParseError,
          std::string(field) + ": not a non-negative integer: '" +
              std::string(s) + "'");
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    raise(Errc::ParseError,
          std::string(field) + ": not a non-negative integer: '" +
              std::string(s) + "'");
  }
  return v;
}

static std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string format_device_line(const DeviceRecord& r) {
  std::string out;
  out += std::to_string(r.timestamp.us);
  out += '\t';
  out += std::to_string(r.task_id);
  out += '\t';
  out.push_back(to_char(r.level));
  out += '\t';
  out += r.tag.name;
  out += '\t';
  out += escape_message(r.message);
  return out;
}

DeviceRecord parse_device_line(std::string_view line) {
  auto fields = split_tabs(line);
  if (fields.size() != 5) {
    raise(Errc::ParseError, "field-count: expected 5 fields, got " +
                                std::to_string(fields.size()));
  }
  DeviceRecord r;
  r.timestamp = parse_timestamp(fields[0], "timestamp");
  r.task_id = parse_u64(fields[1], "task_id");
  r.level = parse_level(fields[2]);
  r.tag = Tag::parse(fields[3]);
  r.message = unescape_message(fields[4]);
  return r;
}

std::string format_stored_line(const StoredRecord& r) {
  std::string out;
  out += r.record.device.hex;
  out += '\t';
  out += std::to_string(r.upload_time.us);
  out += '\t';
  out += std::to_string(r.record.timestamp.us);
  out += '\t';
  out += std::to_string(r.record.task_id);
  out += '\t';
  out.push_back(to_char(r.record.level));
  out += '\t';
  out += r.record.tag.name;
  out += '\t';
  out += escape_message(r.record.message);
  return out;
}

StoredRecord parse_stored_line(std::string_view line, std::uint64_t seq) {
  auto fields = split_tabs(line);
  if (fields.size() != 7) {
    raise(Errc::ParseError, "field-count: expected 7 fields, got " +
                                std::to_string(fields.size()));
  }
  StoredRecord r;
  r.record.device = DeviceId::parse(fields[0]);
  r.upload_time = parse_timestamp(fields[1], "upload_time");
  r.record.timestamp = parse_timestamp(fields[2], "timestamp");
  r.record.task_id = parse_u64(fields[3], "task_id");
  r.record.level = parse_level(fields[4]);
  r.record.tag = Tag::parse(fields[5]);
  r.record.message = unescape_message(fields[6]);
  r.seq = seq;
  return r;
}

std::string format_device_file(const std::vector<DeviceRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += format_device_line(r);
    out.push_back('\n');
  }
  return out;
}

std::vector<DeviceRecord> parse_device_file(std::string_view bytes) {
  std::vector<DeviceRecord> records;
  size_t start = 0;
  while (start < bytes.size()) {
    size_t pos = bytes.find('\n', start);
    if (pos == std::string_view::npos) {
      raise(Errc::ParseError, "file: final line not newline-terminated");
    }
    records.push_back(parse_device_line(bytes.substr(start, pos - start)));
    start = pos + 1;
  }
  return records;
}

}  // namespace fleetbed
