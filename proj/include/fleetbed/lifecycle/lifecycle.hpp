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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleetbed/backend/query.hpp"
#include "fleetbed/core/tags.hpp"
#include "fleetbed/core/types.hpp"

namespace fleetbed::lifecycle {

enum class ExpState {
  Proposed,
  Approved,
  InDevelopment,
  Staged,
  Deployed,
  Ended,
  Removed,
  MergedToMaster,
};

enum class ExpEvent { Approve, StartDev, Stage, Deploy, End, Remove, MergeToMaster };

const char* to_string(ExpState s);
const char* to_string(ExpEvent e);
ExpState parse_exp_state(std::string_view s);
ExpEvent parse_exp_event(std::string_view s);

/// An experiment and its workflow state. State changes are timestamped so
/// audits can ask what was live when a record was produced.
struct Experiment {
  ExperimentKey key;
  std::string description;
  ExpState state = ExpState::Proposed;
  std::optional<TimestampUs> start;  // set by Deploy
  std::optional<TimestampUs> end;    // set by End
  bool irb_approved = false;
  bool permissive_toggle = false;
  std::vector<std::pair<TimestampUs, ExpState>> history;

  std::string tag_namespace() const { return key.str() + "-*"; }

  /// Whether the experiment's instrumentation was sanctioned at `t`
  /// (Staged, Deployed or MergedToMaster).
  bool live_at(TimestampUs t) const;
};

enum class Cohort { Developers, All };

const char* to_string(Cohort c);
Cohort parse_cohort(std::string_view s);

struct Release {
  ImageVersion version;
  std::set<ExperimentKey> included;
  Cohort cohort = Cohort::Developers;
  TimestampUs cut_at;
};

struct DataRequest {
  std::string requester;
  QueryRequest query;
  bool irb_letter = false;
};

struct AuthDecision {
  enum class Kind { Granted, Denied, PreviewGranted };
  Kind kind = Kind::Denied;
  std::size_t preview_cap = 0;  // set for PreviewGranted
  std::string reason;           // set for Denied
};

/// Single authority over experiments, releases and the tag namespace map.
/// One writer; persisted as one JSON document rewritten atomically.
class Registry {
 public:
  Registry() = default;

  // --- experiments -------------------------------------------------------
  Experiment& create(const ExperimentKey& key, const std::string& description,
                     TimestampUs at);
  const Experiment& transition(const ExperimentKey& key, ExpEvent event,
                               TimestampUs at);
  void set_irb(const ExperimentKey& key, bool approved);
  void set_permissive(const ExperimentKey& key, bool on);
  const Experiment* find(const ExperimentKey& key) const;
  const std::map<ExperimentKey, Experiment>& experiments() const {
    return experiments_;
  }

  // --- platform namespaces ----------------------------------------------
  void register_phonelab_namespace(const ExperimentKey& key);

  /// Tag map derived from current state: platform namespaces plus merged
  /// experiments are PhoneLab; all other registered experiments categorize
  /// as Experiments.
  TagRegistry tag_registry() const;

  // --- releases -----------------------------------------------------------
  /// Cuts a release containing `keys` (Ended/Removed experiments are
  /// excluded automatically). Developers releases require every included
  /// experiment at least Staged; All releases additionally require each
  /// Staged experiment to have soaked on a prior Developers release.
  const Release& cut_release(const std::vector<ExperimentKey>& keys,
                             Cohort cohort, TimestampUs at);
  void set_release_fingerprint(std::uint64_t version,
                               const std::string& fingerprint);
  const std::vector<Release>& releases() const { return releases_; }
  const Release* release(std::uint64_t version) const;
  std::optional<std::uint64_t> latest_version(bool include_developer) const;

  void set_soak_seconds(std::int64_t s) { soak_seconds_ = s; }
  std::int64_t soak_seconds() const { return soak_seconds_; }
  void set_preview_limit(std::size_t n) { preview_limit_ = n; }

  // --- data requests ------------------------------------------------------
  AuthDecision authorize_data_request(const DataRequest& req) const;

  // --- persistence ---------------------------------------------------------
  std::string to_json_string() const;
  static Registry from_json_string(const std::string& doc);
  void save(const std::filesystem::path& path) const;  // atomic rewrite
  static Registry load(const std::filesystem::path& path);

 private:
  Experiment& must_find(const ExperimentKey& key);

  std::map<ExperimentKey, Experiment> experiments_;
  std::vector<Release> releases_;
  std::set<ExperimentKey> phonelab_namespaces_;
  std::int64_t soak_seconds_ = 72 * 3600;
  std::size_t preview_limit_ = 10'000;
};

}  // namespace fleetbed::lifecycle
