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
#include "fleetbed/backend/backend.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fleetbed/core/gzip.hpp"
#include "fleetbed/core/time.hpp"

namespace fleetbed::backend {

using nlohmann::json;
namespace fs = std::filesystem;

std::string IngestReport::to_json_string() const {
  json j;
  j["accepted"] = accepted;
  j["duplicates"] = duplicates;
  j["malformed"] = malformed;
  j["bytes_stored"] = bytes_stored;
  return j.dump();
}

IngestReport IngestReport::from_json_string(std::string_view body) {
  try {
    json j = json::parse(body);
    IngestReport r;
    r.accepted = j.at("accepted").get<std::uint64_t>();
    r.duplicates = j.at("duplicates").get<std::uint64_t>();
    r.malformed = j.at("malformed").get<std::uint64_t>();
    r.bytes_stored = j.at("bytes_stored").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("ingest report: ") + e.what());
  }
}

std::string TagStats::to_json_string() const {
  json j;
  j["categories"] = json::array();
  auto row = [](const char* name, const TagStatsRow& r) {
    return json{{"category", name},
                {"tag_count", r.tag_count},
                {"line_count", r.line_count}};
  };
  j["categories"].push_back(row("PhoneLab", phonelab));
  j["categories"].push_back(row("Experiments", experiments));
  j["categories"].push_back(row("Other", other));
  j["total"] = {{"tag_count", total.tag_count}, {"line_count", total.line_count}};
  return j.dump();
}

static std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

static void write_file_atomic(const fs::path& p, std::string_view bytes) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, p);
}

Backend::Backend(Options opts, const lifecycle::Registry* lifecycle)
    : opts_(std::move(opts)), lifecycle_(lifecycle) {
  fs::create_directories(opts_.root / "store");
  fs::create_directories(opts_.root / "images");

  fs::path devices = opts_.root / "devices.json";
  if (fs::exists(devices)) {
    try {
      json j = json::parse(read_file(devices));
      for (auto& [hex, v] : j.items()) {
        enrolled_[hex] = v.value("developer", false);
      }
    } catch (const json::exception& e) {
      raise(Errc::ParseError, std::string("devices.json: ") + e.what());
    }
  }

  fs::path hb = opts_.root / "heartbeats.jsonl";
  if (fs::exists(hb)) {
    std::ifstream in(hb);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      HeartbeatEntry e;
      e.report = agent::HeartbeatReport::from_json_string(j.at("report").dump());
      e.device = e.report.device;
      e.sent_at = e.report.sent_at;
      e.received_at = TimestampUs{j.at("received_at").get<std::int64_t>()};
      heartbeats_.push_back(std::move(e));
    }
  }

  for (const auto& entry : fs::directory_iterator(opts_.root / "images")) {
    if (entry.path().extension() != ".img") continue;
    std::string stem = entry.path().stem().string();
    std::uint64_t version = parse_u64(stem, "image version");
    std::string bytes = read_file(entry.path());
    images_.emplace(version,
                    ota::Image::make(version, std::vector<std::uint8_t>(
                                                  bytes.begin(), bytes.end())));
  }
}

fs::path Backend::device_dir(const std::string& hex) const {
  return opts_.root / "store" / hex;
}

void Backend::save_devices() const {
  json j = json::object();
  for (const auto& [hex, dev] : enrolled_) {
    j[hex] = {{"developer", dev}};
  }
  write_file_atomic(opts_.root / "devices.json", j.dump(2) + "\n");
}

void Backend::enroll(const DeviceId& device, bool developer) {
  std::lock_guard lock(mu_);
  enrolled_[device.hex] = developer;
  save_devices();
}

bool Backend::enrolled(const DeviceId& device) const {
  std::lock_guard lock(mu_);
  return enrolled_.count(device.hex) > 0;
}

bool Backend::is_developer(const DeviceId& device) const {
  std::lock_guard lock(mu_);
  auto it = enrolled_.find(device.hex);
  return it != enrolled_.end() && it->second;
}

std::vector<DeviceId> Backend::devices() const {
  std::lock_guard lock(mu_);
  std::vector<DeviceId> out;
  for (const auto& [hex, dev] : enrolled_) out.push_back(DeviceId{hex});
  return out;
}

std::size_t Backend::enrolled_count() const {
  std::lock_guard lock(mu_);
  return enrolled_.size();
}

Backend::DeviceStore& Backend::load_device(const std::string& hex) const {
  auto it = store_.find(hex);
  if (it != store_.end()) return it->second;

  DeviceStore ds;
  fs::path dir = device_dir(hex);
  if (fs::exists(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      fs::path p = entry.path();
      bool gz = p.extension() == ".gz";
      fs::path logical = gz ? p.stem() : p.filename();
      if (logical.extension() != ".log") continue;

      std::string content = read_file(p);
      if (gz) content = gzip_decompress(content);

      fs::path seq_path = dir / logical.stem();
      seq_path += ".seq";
      std::string seq_bytes = read_file(seq_path);
      if (seq_bytes.size() % 8 != 0) {
        raise(Errc::IoError, "corrupt seq sidecar " + seq_path.string());
      }

      DayBucket bucket;
      std::size_t line_start = 0, idx = 0;
      while (line_start < content.size()) {
        std::size_t pos = content.find('\n', line_start);
        if (pos == std::string::npos) break;
        if (idx * 8 >= seq_bytes.size()) {
          raise(Errc::IoError, "seq sidecar shorter than file " + p.string());
        }
        std::uint64_t seq = 0;
        for (int b = 7; b >= 0; --b) {
          seq = (seq << 8) |
                static_cast<std::uint8_t>(seq_bytes[idx * 8 + b]);
        }
        bucket.records.push_back(parse_stored_line(
            std::string_view(content).substr(line_start, pos - line_start), seq));
        line_start = pos + 1;
        ++idx;
      }
      if (idx * 8 != seq_bytes.size()) {
        raise(Errc::IoError, "seq sidecar longer than file " + p.string());
      }

      std::int64_t day = day_index_from_string(logical.stem().string());
      for (const auto& r : bucket.records) ds.seq_day[r.seq] = day;
      ds.days.emplace(day, std::move(bucket));
    }
  }
  return store_.emplace(hex, std::move(ds)).first->second;
}

void Backend::write_day_file(const std::string& hex, std::int64_t day,
                             const DayBucket& bucket) const {
  fs::path dir = device_dir(hex);
  fs::create_directories(dir);

  std::string content;
  std::string seqs;
  seqs.reserve(bucket.records.size() * 8);
  for (const auto& r : bucket.records) {
    content += format_stored_line(r);
    content.push_back('\n');
    std::uint64_t v = r.seq;
    for (int b = 0; b < 8; ++b) {
      seqs.push_back(static_cast<char>(v & 0xff));
      v >>= 8;
    }
  }

  std::string name = day_index_string(day);
  if (opts_.gzip_files) {
    write_file_atomic(dir / (name + ".log.gz"), gzip_compress(content));
  } else {
    write_file_atomic(dir / (name + ".log"), content);
  }
  write_file_atomic(dir / (name + ".seq"), seqs);
}

const StoredRecord* Backend::find_by_seq(const DeviceStore& ds,
                                         std::uint64_t seq) const {
  auto it = ds.seq_day.find(seq);
  if (it == ds.seq_day.end()) return nullptr;
  auto day_it = ds.days.find(it->second);
  if (day_it == ds.days.end()) return nullptr;
  for (const auto& r : day_it->second.records) {
    if (r.seq == seq) return &r;
  }
  return nullptr;
}

IngestReport Backend::ingest(const UploadEnvelope& envelope) {
  std::lock_guard lock(mu_);
  ++totals_.envelopes;

  if (!enrolled_.count(envelope.device.hex)) {
    ++totals_.envelopes_rejected;
    raise(Errc::UnknownDevice,
          "device " + envelope.device.hex + " not enrolled");
  }

  std::vector<DeviceRecord> records;
  try {
    std::string_view bytes = envelope.file_bytes;
    std::string plain;
    if (envelope.gzipped) {
      plain = gzip_decompress(bytes);
      bytes = plain;
    }
    records = parse_device_file(bytes);
  } catch (const Error&) {
    ++totals_.envelopes_rejected;
    throw;  // all-or-nothing: nothing stored
  }

  DeviceStore& ds = load_device(envelope.device.hex);
  IngestReport report;
  std::set<std::int64_t> dirty_days;

  for (std::size_t i = 0; i < records.size(); ++i) {
    std::uint64_t seq = envelope.first_seq + i;
    const DeviceRecord& rec = records[i];

    if (const StoredRecord* existing = find_by_seq(ds, seq)) {
      // Secondary integrity check on the dedup key: same producer sequence
      // must carry the same content (timestamp, task, tag, message digest).
      bool same = existing->record.timestamp == rec.timestamp &&
                  existing->record.task_id == rec.task_id &&
                  existing->record.tag == rec.tag &&
                  sha256(existing->record.message) == sha256(rec.message);
      if (same) {
        ++report.duplicates;
      } else {
        ++report.malformed;
      }
      continue;
    }

    StoredRecord sr;
    sr.record = LogRecord::from(envelope.device, rec);
    sr.upload_time = envelope.received_at;
    sr.seq = seq;

    std::int64_t day = utc_day_index(rec.timestamp);
    DayBucket& bucket = ds.days[day];
    auto pos = std::upper_bound(
        bucket.records.begin(), bucket.records.end(), sr,
        [](const StoredRecord& a, const StoredRecord& b) {
          if (a.record.timestamp != b.record.timestamp) {
            return a.record.timestamp < b.record.timestamp;
          }
          return a.seq < b.seq;
        });
    report.bytes_stored += format_stored_line(sr).size() + 1;
    bucket.records.insert(pos, std::move(sr));
    ds.seq_day[seq] = day;
    dirty_days.insert(day);
    ++report.accepted;
  }

  for (std::int64_t day : dirty_days) {
    write_day_file(envelope.device.hex, day, ds.days[day]);
  }

  totals_.accepted += report.accepted;
  totals_.duplicates += report.duplicates;
  totals_.malformed += report.malformed;
  totals_.bytes_stored += report.bytes_stored;
  return report;
}

std::vector<StoredRecord> Backend::query(const QueryRequest& req) const {
  req.validate();
  std::lock_guard lock(mu_);

  TagRegistry registry =
      lifecycle_ ? lifecycle_->tag_registry() : TagRegistry{};

  std::vector<std::string> device_list;
  if (req.devices.empty()) {
    for (const auto& [hex, dev] : enrolled_) device_list.push_back(hex);
  } else {
    device_list.assign(req.devices.begin(), req.devices.end());
  }

  std::int64_t first_day = utc_day_index(req.start);
  std::int64_t last_day = utc_day_index(TimestampUs{req.end.us - 1});

  std::vector<StoredRecord> out;
  for (const auto& hex : device_list) {
    const DeviceStore& ds = load_device(hex);
    auto it = ds.days.lower_bound(first_day);
    for (; it != ds.days.end() && it->first <= last_day; ++it) {
      for (const auto& r : it->second.records) {
        if (req.matches(r, registry)) out.push_back(r);
      }
    }
  }

  std::sort(out.begin(), out.end(),
            [](const StoredRecord& a, const StoredRecord& b) {
              if (a.record.timestamp != b.record.timestamp) {
                return a.record.timestamp < b.record.timestamp;
              }
              if (a.record.device != b.record.device) {
                return a.record.device < b.record.device;
              }
              return a.seq < b.seq;
            });
  return out;
}

TagStats Backend::tag_stats() const {
  std::lock_guard lock(mu_);
  TagRegistry registry =
      lifecycle_ ? lifecycle_->tag_registry() : TagRegistry{};

  std::map<std::string, std::pair<TagCategory, std::uint64_t>> per_tag;
  for (const auto& [hex, dev] : enrolled_) {
    const DeviceStore& ds = load_device(hex);
    for (const auto& [day, bucket] : ds.days) {
      for (const auto& r : bucket.records) {
        auto& slot = per_tag[r.record.tag.name];
        if (slot.second == 0) {
          slot.first = categorize_tag(r.record.tag, registry);
        }
        ++slot.second;
      }
    }
  }

  TagStats stats;
  for (const auto& [tag, info] : per_tag) {
    TagStatsRow* row = nullptr;
    switch (info.first) {
      case TagCategory::PhoneLab: row = &stats.phonelab; break;
      case TagCategory::Experiments: row = &stats.experiments; break;
      case TagCategory::Other: row = &stats.other; break;
    }
    row->tag_count += 1;
    row->line_count += info.second;
  }
  stats.total.tag_count =
      stats.phonelab.tag_count + stats.experiments.tag_count + stats.other.tag_count;
  stats.total.line_count = stats.phonelab.line_count +
                           stats.experiments.line_count + stats.other.line_count;
  return stats;
}

void Backend::record_heartbeat(const agent::HeartbeatReport& report,
                               TimestampUs received_at) {
  std::lock_guard lock(mu_);
  if (!enrolled_.count(report.device.hex)) {
    raise(Errc::UnknownDevice,
          "device " + report.device.hex + " not enrolled");
  }
  HeartbeatEntry e{report.device, report.sent_at, received_at, report};
  append_heartbeat_line(e);
  heartbeats_.push_back(std::move(e));
}

void Backend::append_heartbeat_line(const HeartbeatEntry& e) const {
  std::ofstream out(opts_.root / "heartbeats.jsonl",
                    std::ios::binary | std::ios::app);
  if (!out) raise(Errc::IoError, "cannot append heartbeats.jsonl");
  json j;
  j["received_at"] = e.received_at.us;
  j["report"] = json::parse(e.report.to_json_string());
  out << j.dump() << '\n';
}

std::vector<HeartbeatEntry> Backend::heartbeats() const {
  std::lock_guard lock(mu_);
  return heartbeats_;
}

void Backend::add_image(ota::Image image) {
  std::lock_guard lock(mu_);
  std::uint64_t version = image.version.version;
  if (version == 0) raise(Errc::InvalidArgument, "image version must be positive");
  char name[32];
  std::snprintf(name, sizeof(name), "%llu.img",
                static_cast<unsigned long long>(version));
  write_file_atomic(opts_.root / "images" / name,
                    std::string_view(reinterpret_cast<const char*>(image.bytes.data()),
                                     image.bytes.size()));
  images_[version] = std::move(image);
}

const ota::Image* Backend::image(std::uint64_t version) const {
  std::lock_guard lock(mu_);
  auto it = images_.find(version);
  return it == images_.end() ? nullptr : &it->second;
}

std::optional<std::uint64_t> Backend::latest_image_version() const {
  std::lock_guard lock(mu_);
  if (images_.empty()) return std::nullopt;
  return images_.rbegin()->first;
}

std::uint64_t Backend::target_version_for(const DeviceId& device) const {
  // Caller holds mu_.
  bool developer = false;
  if (auto it = enrolled_.find(device.hex); it != enrolled_.end()) {
    developer = it->second;
  }
  if (lifecycle_ && !lifecycle_->releases().empty()) {
    auto v = lifecycle_->latest_version(developer);
    if (v && images_.count(*v)) return *v;
    return 0;
  }
  return images_.empty() ? 0 : images_.rbegin()->first;
}

std::optional<std::uint64_t> Backend::ota_available_for(
    const DeviceId& device, std::uint64_t current_version) const {
  std::lock_guard lock(mu_);
  if (!enrolled_.count(device.hex)) {
    raise(Errc::UnknownDevice, "device " + device.hex + " not enrolled");
  }
  std::uint64_t target = target_version_for(device);
  if (target == 0 || current_version >= target) return std::nullopt;
  return target;
}

std::optional<ota::UpdatePackage> Backend::ota_package_for(
    const DeviceId& device, std::uint64_t current_version) const {
  std::lock_guard lock(mu_);
  if (!enrolled_.count(device.hex)) {
    raise(Errc::UnknownDevice, "device " + device.hex + " not enrolled");
  }
  std::uint64_t target = target_version_for(device);
  if (target == 0 || current_version >= target) return std::nullopt;

  auto cached = package_cache_.find({current_version, target});
  if (cached != package_cache_.end()) return cached->second;

  // Incremental only when the device's version is one of the last
  // history_depth images before the target.
  bool reachable = false;
  int back = 0;
  for (auto it = images_.find(target);
       it != images_.begin() && back < opts_.history_depth;) {
    --it;
    ++back;
    if (it->first == current_version) {
      reachable = true;
      break;
    }
  }

  const ota::Image& target_img = images_.at(target);
  ota::UpdatePackage pkg;
  if (reachable) {
    pkg = ota::generate(images_.at(current_version), target_img);
    package_cache_[{current_version, target}] = pkg;
  } else {
    pkg = ota::full_package(target_img);
    package_cache_[{0, target}] = pkg;
  }
  return pkg;
}

std::uint64_t Backend::audit_namespace_violations(TimestampUs since) const {
  std::lock_guard lock(mu_);
  if (!lifecycle_) return 0;
  std::uint64_t count = 0;
  for (const auto& [hex, ds] : store_) {
    for (const auto& [day, bucket] : ds.days) {
      for (const auto& r : bucket.records) {
        if (r.record.timestamp < since) continue;
        auto parts = split_tag(r.record.tag);
        if (!parts) continue;
        const lifecycle::Experiment* exp =
            lifecycle_->find(ExperimentKey{parts->institution, parts->code});
        if (exp && !exp->live_at(r.record.timestamp)) ++count;
      }
    }
  }
  return count;
}

Backend::Totals Backend::totals() const {
  std::lock_guard lock(mu_);
  return totals_;
}

std::uint64_t Backend::stored_record_count() const {
  std::lock_guard lock(mu_);
  std::uint64_t n = 0;
  for (const auto& [hex, dev] : enrolled_) {
    const DeviceStore& ds = load_device(hex);
    for (const auto& [day, bucket] : ds.days) n += bucket.records.size();
  }
  return n;
}

}  // namespace fleetbed::backend
