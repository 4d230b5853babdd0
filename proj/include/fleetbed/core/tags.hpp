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

#include <map>
#include <optional>
#include <string>

#include "fleetbed/core/types.hpp"

namespace fleetbed {

/// Identifies the owner of a tag namespace: author institution plus
/// experiment code name.
struct ExperimentKey {
  std::string institution;
  std::string code;

  auto operator<=>(const ExperimentKey&) const = default;

  std::string str() const { return institution + "-" + code; }
};

struct TagParts {
  std::string institution;
  std::string code;
  std::string detail;
};

/// Splits `Institution-Code-Detail`. Returns nothing when the tag does not
/// follow the convention (fewer than two separators, or non-alphanumeric
/// institution/code).
std::optional<TagParts> split_tag(const Tag& tag);

/// Registered namespaces and who owns them: permanent platform
/// instrumentation or a (temporary) experiment. Every other tag is framework
/// or kernel output.
class TagRegistry {
 public:
  enum class Owner { PhoneLab, Experiment };

  void register_phonelab(const ExperimentKey& key) { owners_[key] = Owner::PhoneLab; }
  void register_experiment(const ExperimentKey& key) { owners_[key] = Owner::Experiment; }

  /// The registered pair a tag belongs to, if any.
  std::optional<ExperimentKey> resolve(const Tag& tag) const;

  TagCategory categorize(const Tag& tag) const;

  bool empty() const { return owners_.empty(); }

 private:
  std::map<ExperimentKey, Owner> owners_;
};

/// Total partition of tags into {PhoneLab, Experiments, Other}.
TagCategory categorize_tag(const Tag& tag, const TagRegistry& registry);

struct TagRuleResult {
  bool ok = false;
  std::string violation;  // empty when ok
};

/// Checks a tag against its owning experiment's namespace:
/// `<institution>-<code>-<detail>` with a non-empty detail whose first
/// character is alphanumeric. Never throws.
TagRuleResult validate_tag_name(const Tag& tag, const ExperimentKey& owner);

}  // namespace fleetbed
