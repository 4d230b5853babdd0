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
#include "fleetbed/lifecycle/lifecycle.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "fleetbed/error.hpp"

namespace fleetbed::lifecycle {

using nlohmann::json;

const char* to_string(ExpState s) {
  switch (s) {
    case ExpState::Proposed: return "Proposed";
    case ExpState::Approved: return "Approved";
    case ExpState::InDevelopment: return "InDevelopment";
    case ExpState::Staged: return "Staged";
    case ExpState::Deployed: return "Deployed";
    case ExpState::Ended: return "Ended";
    case ExpState::Removed: return "Removed";
    case ExpState::MergedToMaster: return "MergedToMaster";
  }
  return "?";
}

const char* to_string(ExpEvent e) {
  switch (e) {
    case ExpEvent::Approve: return "Approve";
    case ExpEvent::StartDev: return "StartDev";
    case ExpEvent::Stage: return "Stage";
    case ExpEvent::Deploy: return "Deploy";
    case ExpEvent::End: return "End";
    case ExpEvent::Remove: return "Remove";
    case ExpEvent::MergeToMaster: return "MergeToMaster";
  }
  return "?";
}

ExpState parse_exp_state(std::string_view s) {
  for (ExpState v :
       {ExpState::Proposed, ExpState::Approved, ExpState::InDevelopment,
        ExpState::Staged, ExpState::Deployed, ExpState::Ended,
        ExpState::Removed, ExpState::MergedToMaster}) {
    if (s == to_string(v)) return v;
  }
  raise(Errc::ParseError, "experiment state: '" + std::string(s) + "'");
}

ExpEvent parse_exp_event(std::string_view s) {
  for (ExpEvent v : {ExpEvent::Approve, ExpEvent::StartDev, ExpEvent::Stage,
                     ExpEvent::Deploy, ExpEvent::End, ExpEvent::Remove,
                     ExpEvent::MergeToMaster}) {
    if (s == to_string(v)) return v;
  }
  raise(Errc::ParseError, "experiment event: '" + std::string(s) + "'");
}

const char* to_string(Cohort c) {
  return c == Cohort::Developers ? "Developers" : "All";
}

Cohort parse_cohort(std::string_view s) {
  if (s == "Developers" || s == "developers") return Cohort::Developers;
  if (s == "All" || s == "all") return Cohort::All;
  raise(Errc::ParseError, "cohort: '" + std::string(s) + "'");
}

static bool live_state(ExpState s) {
  return s == ExpState::Staged || s == ExpState::Deployed ||
         s == ExpState::MergedToMaster;
}

bool Experiment::live_at(TimestampUs t) const {
  // history holds (since, state) in chronological order; the state at t is
  // the last entry at or before it.
  ExpState at = ExpState::Proposed;
  for (const auto& [since, s] : history) {
    if (since > t) break;
    at = s;
  }
  return live_state(at);
}

Experiment& Registry::must_find(const ExperimentKey& key) {
  auto it = experiments_.find(key);
  if (it == experiments_.end()) {
    raise(Errc::NotFound, "no experiment " + key.str());
  }
  return it->second;
}

const Experiment* Registry::find(const ExperimentKey& key) const {
  auto it = experiments_.find(key);
  return it == experiments_.end() ? nullptr : &it->second;
}

Experiment& Registry::create(const ExperimentKey& key,
                             const std::string& description, TimestampUs at) {
  if (key.institution.empty() || key.code.empty()) {
    raise(Errc::InvalidArgument, "experiment needs institution and code");
  }
  if (experiments_.count(key)) {
    raise(Errc::StateError, "experiment " + key.str() + " already exists");
  }
  Experiment exp;
  exp.key = key;
  exp.description = description;
  exp.state = ExpState::Proposed;
  exp.history.emplace_back(at, ExpState::Proposed);
  return experiments_.emplace(key, std::move(exp)).first->second;
}

// Workflow graph. StartDev re-enters from Staged when developer testing
// finds problems.
static std::optional<ExpState> next_state(ExpState from, ExpEvent ev) {
  switch (ev) {
    case ExpEvent::Approve:
      if (from == ExpState::Proposed) return ExpState::Approved;
      break;
    case ExpEvent::StartDev:
      if (from == ExpState::Approved || from == ExpState::Staged) {
        return ExpState::InDevelopment;
      }
      break;
    case ExpEvent::Stage:
      if (from == ExpState::InDevelopment) return ExpState::Staged;
      break;
    case ExpEvent::Deploy:
      if (from == ExpState::Staged) return ExpState::Deployed;
      break;
    case ExpEvent::End:
      if (from == ExpState::Deployed) return ExpState::Ended;
      break;
    case ExpEvent::Remove:
      if (from == ExpState::Ended) return ExpState::Removed;
      break;
    case ExpEvent::MergeToMaster:
      if (from == ExpState::Ended) return ExpState::MergedToMaster;
      break;
  }
  return std::nullopt;
}

const Experiment& Registry::transition(const ExperimentKey& key, ExpEvent event,
                                       TimestampUs at) {
  Experiment& exp = must_find(key);
  auto next = next_state(exp.state, event);
  if (!next) {
    raise(Errc::StateError, "event " + std::string(to_string(event)) +
                                " not legal in state " +
                                std::string(to_string(exp.state)) + " for " +
                                key.str());
  }
  exp.state = *next;
  exp.history.emplace_back(at, exp.state);
  if (event == ExpEvent::Deploy) exp.start = at;
  if (event == ExpEvent::End) exp.end = at;
  return exp;
}

void Registry::set_irb(const ExperimentKey& key, bool approved) {
  must_find(key).irb_approved = approved;
}

void Registry::set_permissive(const ExperimentKey& key, bool on) {
  must_find(key).permissive_toggle = on;
}

void Registry::register_phonelab_namespace(const ExperimentKey& key) {
  phonelab_namespaces_.insert(key);
}

TagRegistry Registry::tag_registry() const {
  TagRegistry reg;
  for (const auto& key : phonelab_namespaces_) {
    reg.register_phonelab(key);
  }
  for (const auto& [key, exp] : experiments_) {
    if (exp.state == ExpState::MergedToMaster) {
      reg.register_phonelab(key);
    } else {
      reg.register_experiment(key);
    }
  }
  return reg;
}

const Release* Registry::release(std::uint64_t version) const {
  for (const auto& r : releases_) {
    if (r.version.version == version) return &r;
  }
  return nullptr;
}

std::optional<std::uint64_t> Registry::latest_version(
    bool include_developer) const {
  std::optional<std::uint64_t> best;
  for (const auto& r : releases_) {
    if (r.cohort == Cohort::Developers && !include_developer) continue;
    if (!best || r.version.version > *best) best = r.version.version;
  }
  return best;
}

const Release& Registry::cut_release(const std::vector<ExperimentKey>& keys,
                                     Cohort cohort, TimestampUs at) {
  std::set<ExperimentKey> included;
  for (const auto& key : keys) {
    const Experiment& exp = must_find(key);
    if (exp.state == ExpState::Ended || exp.state == ExpState::Removed) {
      continue;  // removal: the next release simply omits them
    }
    switch (exp.state) {
      case ExpState::Proposed:
      case ExpState::Approved:
      case ExpState::InDevelopment:
        raise(Errc::StateError, "experiment " + key.str() + " in state " +
                                    std::string(to_string(exp.state)) +
                                    " cannot be released");
      default: break;
    }
    if (cohort == Cohort::All && exp.state == ExpState::Staged) {
      // Needs a prior Developers release containing it, soaked long enough.
      const Release* dev = nullptr;
      for (const auto& r : releases_) {
        if (r.cohort == Cohort::Developers && r.included.count(key)) dev = &r;
      }
      if (!dev) {
        raise(Errc::StagingError,
              "experiment " + key.str() +
                  " has no prior Developers release; developers receive "
                  "changes first");
      }
      if (at.us - dev->cut_at.us < soak_seconds_ * 1'000'000) {
        raise(Errc::StagingError,
              "experiment " + key.str() + " soak period not elapsed");
      }
    }
    included.insert(key);
  }

  Release rel;
  rel.version.version =
      releases_.empty() ? 1 : releases_.back().version.version + 1;
  rel.included = std::move(included);
  rel.cohort = cohort;
  rel.cut_at = at;
  releases_.push_back(std::move(rel));
  return releases_.back();
}

void Registry::set_release_fingerprint(std::uint64_t version,
                                       const std::string& fingerprint) {
  for (auto& r : releases_) {
    if (r.version.version == version) {
      r.version.fingerprint = fingerprint;
      return;
    }
  }
  raise(Errc::NotFound, "no release v" + std::to_string(version));
}

AuthDecision Registry::authorize_data_request(const DataRequest& req) const {
  if (req.query.start >= req.query.end) {
    return {AuthDecision::Kind::Denied, 0, "invalid time range"};
  }
  if (req.irb_letter) {
    return {AuthDecision::Kind::Granted, 0, ""};
  }
  return {AuthDecision::Kind::PreviewGranted, preview_limit_, ""};
}

// --- persistence -----------------------------------------------------------

static json key_json(const ExperimentKey& k) {
  return json{{"institution", k.institution}, {"code", k.code}};
}

static ExperimentKey key_from(const json& j) {
  return ExperimentKey{j.at("institution").get<std::string>(),
                       j.at("code").get<std::string>()};
}

std::string Registry::to_json_string() const {
  json doc;
  doc["soak_seconds"] = soak_seconds_;
  doc["preview_limit"] = preview_limit_;
  doc["phonelab_namespaces"] = json::array();
  for (const auto& k : phonelab_namespaces_) {
    doc["phonelab_namespaces"].push_back(key_json(k));
  }
  doc["experiments"] = json::array();
  for (const auto& [key, exp] : experiments_) {
    json e;
    e["key"] = key_json(key);
    e["description"] = exp.description;
    e["state"] = to_string(exp.state);
    if (exp.start) e["start"] = exp.start->us;
    if (exp.end) e["end"] = exp.end->us;
    e["irb_approved"] = exp.irb_approved;
    e["permissive_toggle"] = exp.permissive_toggle;
    e["history"] = json::array();
    for (const auto& [at, s] : exp.history) {
      e["history"].push_back(json{{"at", at.us}, {"state", to_string(s)}});
    }
    doc["experiments"].push_back(std::move(e));
  }
  doc["releases"] = json::array();
  for (const auto& r : releases_) {
    json rj;
    rj["version"] = r.version.version;
    rj["fingerprint"] = r.version.fingerprint;
    rj["cohort"] = to_string(r.cohort);
    rj["cut_at"] = r.cut_at.us;
    rj["included"] = json::array();
    for (const auto& k : r.included) rj["included"].push_back(key_json(k));
    doc["releases"].push_back(std::move(rj));
  }
  return doc.dump(2);
}

Registry Registry::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("registry: ") + e.what());
  }
  Registry reg;
  reg.soak_seconds_ = doc.value("soak_seconds", std::int64_t{72 * 3600});
  reg.preview_limit_ = doc.value("preview_limit", std::size_t{10'000});
  for (const auto& k : doc.value("phonelab_namespaces", json::array())) {
    reg.phonelab_namespaces_.insert(key_from(k));
  }
  for (const auto& e : doc.value("experiments", json::array())) {
    Experiment exp;
    exp.key = key_from(e.at("key"));
    exp.description = e.value("description", "");
    exp.state = parse_exp_state(e.at("state").get<std::string>());
    if (e.contains("start")) exp.start = TimestampUs{e["start"].get<std::int64_t>()};
    if (e.contains("end")) exp.end = TimestampUs{e["end"].get<std::int64_t>()};
    exp.irb_approved = e.value("irb_approved", false);
    exp.permissive_toggle = e.value("permissive_toggle", false);
    for (const auto& h : e.value("history", json::array())) {
      exp.history.emplace_back(TimestampUs{h.at("at").get<std::int64_t>()},
                               parse_exp_state(h.at("state").get<std::string>()));
    }
    reg.experiments_.emplace(exp.key, std::move(exp));
  }
  for (const auto& rj : doc.value("releases", json::array())) {
    Release r;
    r.version.version = rj.at("version").get<std::uint64_t>();
    r.version.fingerprint = rj.value("fingerprint", "");
    r.cohort = parse_cohort(rj.at("cohort").get<std::string>());
    r.cut_at = TimestampUs{rj.at("cut_at").get<std::int64_t>()};
    for (const auto& k : rj.value("included", json::array())) {
      r.included.insert(key_from(k));
    }
    reg.releases_.push_back(std::move(r));
  }
  return reg;
}

void Registry::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::IoError, "cannot write " + tmp.string());
    out << to_json_string() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Registry Registry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace fleetbed::lifecycle
