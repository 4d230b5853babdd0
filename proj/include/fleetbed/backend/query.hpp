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

#include <set>
#include <string>

#include "fleetbed/core/record.hpp"
#include "fleetbed/core/tags.hpp"

namespace fleetbed {

/// Dataset filter: half-open time range plus optional tag/device/category
/// restrictions (an empty set means "all").
struct QueryRequest {
  TimestampUs start;
  TimestampUs end;  // exclusive
  std::set<std::string> tags;
  std::set<std::string> devices;
  std::set<TagCategory> categories;

  void validate() const {
    if (start >= end) {
      raise(Errc::InvalidArgument, "query range start must be below end");
    }
  }

  bool matches(const StoredRecord& r, const TagRegistry& registry) const {
    if (r.record.timestamp < start || r.record.timestamp >= end) return false;
    if (!tags.empty() && !tags.count(r.record.tag.name)) return false;
    if (!devices.empty() && !devices.count(r.record.device.hex)) return false;
    if (!categories.empty() &&
        !categories.count(categorize_tag(r.record.tag, registry))) {
      return false;
    }
    return true;
  }
};

}  // namespace fleetbed
