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
#include "fleetbed/core/tags.hpp"

#include <cctype>

namespace fleetbed {

static bool alnum(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::optional<TagParts> split_tag(const Tag& tag) {
  const std::string& s = tag.name;
  size_t d1 = s.find('-');
  if (d1 == std::string::npos) return std::nullopt;
  size_t d2 = s.find('-', d1 + 1);
  if (d2 == std::string::npos) return std::nullopt;
  TagParts p{s.substr(0, d1), s.substr(d1 + 1, d2 - d1 - 1), s.substr(d2 + 1)};
  if (!alnum(p.institution) || !alnum(p.code) || p.detail.empty()) {
    return std::nullopt;
  }
  return p;
}

std::optional<ExperimentKey> TagRegistry::resolve(const Tag& tag) const {
  auto parts = split_tag(tag);
  if (!parts) return std::nullopt;
  ExperimentKey key{parts->institution, parts->code};
  if (owners_.count(key)) return key;
  return std::nullopt;
}

TagCategory TagRegistry::categorize(const Tag& tag) const {
  auto parts = split_tag(tag);
  if (!parts) return TagCategory::Other;
  auto it = owners_.find(ExperimentKey{parts->institution, parts->code});
  if (it == owners_.end()) return TagCategory::Other;
  return it->second == Owner::PhoneLab ? TagCategory::PhoneLab
                                       : TagCategory::Experiments;
}

TagCategory categorize_tag(const Tag& tag, const TagRegistry& registry) {
  return registry.categorize(tag);
}

TagRuleResult validate_tag_name(const Tag& tag, const ExperimentKey& owner) {
  const std::string& s = tag.name;
  const std::string inst_prefix = owner.institution + "-";
  if (s.rfind(inst_prefix, 0) != 0) {
    return {false, "missing institution '" + owner.institution + "'"};
  }
  const std::string code_prefix = inst_prefix + owner.code + "-";
  if (s.rfind(code_prefix, 0) != 0) {
    return {false, "missing code '" + owner.code + "'"};
  }
  std::string detail = s.substr(code_prefix.size());
  if (detail.empty()) {
    return {false, "empty detail"};
  }
  if (!std::isalnum(static_cast<unsigned char>(detail[0]))) {
    return {false, "detail must start with an alphanumeric character"};
  }
  return {true, ""};
}

}  // namespace fleetbed
