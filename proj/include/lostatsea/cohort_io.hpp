// Copyright 2026 The lostatsea Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Cohort files are JSON Lines. Line 1 is a header {"schema_version": "1"};
// every following non-blank line is one group. Fields this library does not
// know are carried through unchanged. Serialization is canonical: members in
// id order and object keys sorted, so ingest -> write -> ingest is stable.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lostatsea/records.hpp"

namespace lostatsea {

/// Rejection of one line of a cohort file.
struct Diagnostic {
  std::size_t line = 0;
  std::string group_id;  // empty when the line could not be read far enough
  std::string path;
  std::string message;

  std::string str() const {
    std::string s = "line " + std::to_string(line);
    if (!group_id.empty()) s += " (group " + group_id + ")";
    s += ": ";
    if (!path.empty()) s += path + ": ";
    return s + message;
  }
};

struct IngestResult {
  Cohort cohort;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

namespace detail {

/// Thrown while decoding a group, carrying the offending field path.
struct FieldError : ValidationError {
  std::string path;
  FieldError(std::string p, const std::string& msg) : ValidationError(msg), path(std::move(p)) {}
};

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw FieldError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FieldError(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

template <typename T>
T get_as(const Json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FieldError(path, "wrong type (" + std::string(v.type_name()) + ")");
  }
}

template <typename T>
T required(const Json& obj, const std::string& key, const std::string& path) {
  const std::string p = path.empty() ? key : path + "." + key;
  return get_as<T>(field(obj, key, path), p);
}

inline std::string optional_string(const Json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return get_as<std::string>(*it, path + "." + key);
}

inline Json leftovers(const Json& obj, std::initializer_list<std::string_view> known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) extra[it.key()] = it.value();
  }
  return extra;
}

inline void merge_extra(Json& obj, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it)
    if (!obj.contains(it.key())) obj[it.key()] = it.value();
}

inline ParticipantId id_from(const Json& v, const std::string& path) {
  auto s = get_as<std::string>(v, path);
  if (s.empty()) throw FieldError(path, "participant id must be non-empty");
  return ParticipantId(std::move(s));
}

inline std::vector<ParticipantId> ids_from(const Json& v, const std::string& path) {
  if (!v.is_array()) throw FieldError(path, "expected an array");
  std::vector<ParticipantId> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(id_from(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json ids_to_json(const std::vector<ParticipantId>& ids) {
  Json a = Json::array();
  for (const auto& id : ids) a.push_back(id.str());
  return a;
}

inline ParticipantRecord member_from_json(const Json& j, const std::string& p) {
  ParticipantRecord m;
  m.id = id_from(field(j, "id", p), p + ".id");

  const auto& prof = field(j, "profile", p);
  const std::string pp = p + ".profile";
  m.profile.display_name = optional_string(prof, "name", pp);
  m.profile.avatar = optional_string(prof, "avatar", pp);
  m.profile.pronouns = required<std::string>(prof, "pronouns", pp);
  m.profile.extra = leftovers(prof, {"name", "avatar", "pronouns"});

  if (auto it = j.find("pseudonym"); it != j.end() && !it->is_null())
    m.pseudonym = get_as<std::string>(*it, p + ".pseudonym");

  if (auto it = j.find("survey"); it != j.end() && !it->is_null()) {
    const std::string sp = p + ".survey";
    const auto& s = *it;
    if (!s.is_object()) throw FieldError(sp, "expected an object");
    m.survey.survival_experience = optional_string(s, "survival_experience", sp);
    m.survey.leadership_experience = optional_string(s, "leadership_experience", sp);
    m.survey.risk_willingness = required<int>(s, "risk_willingness", sp);
    m.survey.gender_task_belief = required<int>(s, "gender_task_belief", sp);
    m.survey.gender_leader_belief = required<int>(s, "gender_leader_belief", sp);
    m.survey.extra = leftovers(s, {"survival_experience", "leadership_experience", "risk_willingness",
                                   "gender_task_belief", "gender_leader_belief"});
  } else {
    throw FieldError(p + ".survey", "missing required field");
  }

  if (auto it = j.find("nomination"); it != j.end() && !it->is_null()) {
    double w = get_as<double>(*it, p + ".nomination");
    if (!(w >= kMinNomination && w <= kMaxNomination))
      throw FieldError(p + ".nomination", "value " + it->dump() + " outside [0, 10]");
    m.nomination = w;
  }
  if (auto it = j.find("ballot"); it != j.end() && !it->is_null()) m.ballot = ids_from(*it, p + ".ballot");
  if (auto it = j.find("task_answers"); it != j.end() && !it->is_null())
    m.task_answers = get_as<AnswerMap>(*it, p + ".task_answers");
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
    const std::string sp = p + ".score";
    TaskScore s;
    s.participant = m.id;
    s.correct = required<int>(*it, "correct", sp);
    s.max_items = required<int>(*it, "max_items", sp);
    m.score = s;
  }
  m.extra = leftovers(j, {"id", "profile", "pseudonym", "survey", "nomination", "ballot", "task_answers", "score"});
  return m;
}

inline Json member_to_json(const ParticipantRecord& m) {
  Json profile = {{"name", m.profile.display_name},
                  {"avatar", m.profile.avatar},
                  {"pronouns", m.profile.pronouns}};
  merge_extra(profile, m.profile.extra);
  Json survey = {{"survival_experience", m.survey.survival_experience},
                 {"leadership_experience", m.survey.leadership_experience},
                 {"risk_willingness", m.survey.risk_willingness},
                 {"gender_task_belief", m.survey.gender_task_belief},
                 {"gender_leader_belief", m.survey.gender_leader_belief}};
  merge_extra(survey, m.survey.extra);
  Json j = {{"id", m.id.str()}, {"profile", std::move(profile)}, {"survey", std::move(survey)}};
  if (m.pseudonym) j["pseudonym"] = *m.pseudonym;
  if (m.nomination) j["nomination"] = *m.nomination;
  if (m.ballot) j["ballot"] = ids_to_json(*m.ballot);
  if (m.task_answers) j["task_answers"] = *m.task_answers;
  if (m.score) j["score"] = {{"correct", m.score->correct}, {"max_items", m.score->max_items}};
  merge_extra(j, m.extra);
  return j;
}

inline Json candidates_to_json(const CandidateSet& c) {
  Json ranked = Json::array();
  for (const auto& n : c.trace.ranked) ranked.push_back({{"id", n.participant.str()}, {"w", n.score}});
  Json selection = {{"ranked", std::move(ranked)},
                    {"cutoff_w", c.trace.cutoff_score},
                    {"resolution", to_string(c.trace.resolution)},
                    {"seed", c.trace.seed}};
  if (!c.trace.tied_at_cutoff.empty()) selection["tied_at_cutoff"] = ids_to_json(c.trace.tied_at_cutoff);
  return {{"members", ids_to_json(c.members)}, {"selection", std::move(selection)}};
}

inline CandidateSet candidates_from_json(const Json& j, const std::string& p) {
  CandidateSet c;
  c.members = ids_from(field(j, "members", p), p + ".members");
  if (auto it = j.find("selection"); it != j.end() && !it->is_null()) {
    const std::string sp = p + ".selection";
    const auto& s = *it;
    if (auto r = s.find("ranked"); r != s.end()) {
      for (std::size_t i = 0; i < r->size(); ++i) {
        const std::string rp = sp + ".ranked[" + std::to_string(i) + "]";
        c.trace.ranked.push_back({id_from(field((*r)[i], "id", rp), rp + ".id"), required<double>((*r)[i], "w", rp)});
      }
    }
    if (s.contains("cutoff_w")) c.trace.cutoff_score = required<double>(s, "cutoff_w", sp);
    if (s.contains("resolution")) {
      try {
        c.trace.resolution = parse_cutoff_resolution(required<std::string>(s, "resolution", sp));
      } catch (const FieldError&) {
        throw;
      } catch (const ValidationError& e) {
        throw FieldError(sp + ".resolution", e.what());
      }
    }
    if (s.contains("seed")) c.trace.seed = required<std::uint64_t>(s, "seed", sp);
    if (s.contains("tied_at_cutoff")) c.trace.tied_at_cutoff = ids_from(s.at("tied_at_cutoff"), sp + ".tied_at_cutoff");
  }
  return c;
}

inline Json election_to_json(const ElectionOutcome& e) {
  Json trace = Json::array();
  for (auto r : e.tiebreak_trace) trace.push_back(to_string(r));
  Json j = {{"candidates", candidates_to_json(e.candidates)},
            {"elected", e.elected.str()},
            {"tiebreak_trace", std::move(trace)}};
  if (!e.pairwise.empty()) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < e.pairwise.size(); ++i) {
      Json row = Json::array();
      for (std::size_t k = 0; k < e.pairwise.size(); ++k) row.push_back(e.pairwise.at(i, k));
      rows.push_back(std::move(row));
    }
    j["pairwise"] = std::move(rows);
  }
  if (!e.borda.empty()) {
    Json b = Json::object();
    for (const auto& [id, pts] : e.borda) b[id.str()] = pts;
    j["borda"] = std::move(b);
  }
  return j;
}

inline ElectionOutcome election_from_json(const Json& j, const std::string& p) {
  ElectionOutcome e;
  e.candidates = candidates_from_json(field(j, "candidates", p), p + ".candidates");
  e.elected = id_from(field(j, "elected", p), p + ".elected");
  if (auto it = j.find("tiebreak_trace"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string tp = p + ".tiebreak_trace[" + std::to_string(i) + "]";
      try {
        e.tiebreak_trace.push_back(parse_tiebreak_rule(get_as<std::string>((*it)[i], tp)));
      } catch (const FieldError&) {
        throw;
      } catch (const ValidationError& err) {
        throw FieldError(tp, err.what());
      }
    }
  } else {
    throw FieldError(p + ".tiebreak_trace", "missing required field");
  }
  if (auto it = j.find("pairwise"); it != j.end() && !it->is_null()) {
    const std::size_t n = e.candidates.size();
    if (!it->is_array() || it->size() != n) throw FieldError(p + ".pairwise", "expected " + std::to_string(n) + " rows");
    e.pairwise = PairwiseMatrix(e.candidates.members);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string rp = p + ".pairwise[" + std::to_string(i) + "]";
      auto row = get_as<std::vector<int>>((*it)[i], rp);
      if (row.size() != n) throw FieldError(rp, "expected " + std::to_string(n) + " columns");
      for (std::size_t k = 0; k < n; ++k) e.pairwise.at(i, k) = row[k];
    }
  }
  if (auto it = j.find("borda"); it != j.end() && !it->is_null()) {
    for (const auto& [k, v] : it->items()) {
      if (k.empty()) throw FieldError(p + ".borda", "empty participant id");
      e.borda[ParticipantId(k)] = get_as<int>(v, p + ".borda." + k);
    }
  }
  return e;
}

inline Json gap_to_json(const GapReport& g) {
  return {{"optimal", ids_to_json(g.optimal_set)},
          {"delta_total", g.delta_total},
          {"delta_self", g.delta_self},
          {"delta_peer", g.delta_peer},
          {"max_items", g.max_items},
          {"normalized_total", g.normalized_total()},
          {"normalized_self", g.normalized_self()},
          {"normalized_peer", g.normalized_peer()}};
}

inline GapReport gap_from_json(const Json& j, const std::string& p, const std::string& group_id) {
  GapReport g;
  g.group = group_id;
  g.optimal_set = ids_from(field(j, "optimal", p), p + ".optimal");
  g.delta_total = required<int>(j, "delta_total", p);
  g.delta_self = required<int>(j, "delta_self", p);
  g.delta_peer = required<int>(j, "delta_peer", p);
  g.max_items = required<int>(j, "max_items", p);
  if (g.max_items <= 0) throw FieldError(p + ".max_items", "must be positive");
  return g;
}

}  // namespace detail

/// Decode one group line. Throws detail::FieldError on structural problems;
/// invariants are checked separately with check_group().
inline GroupRecord group_from_json(const Json& j) {
  using namespace detail;
  GroupRecord g;
  g.group_id = required<std::string>(j, "group_id", "");
  try {
    g.treatment = parse_treatment(required<std::string>(j, "treatment", ""));
  } catch (const FieldError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FieldError("treatment", e.what());
  }
  if (auto it = j.find("origin"); it != j.end()) {
    try {
      g.origin = parse_origin(get_as<std::string>(*it, "origin"));
    } catch (const FieldError&) {
      throw;
    } catch (const ValidationError& e) {
      throw FieldError("origin", e.what());
    }
  }
  if (auto it = j.find("model"); it != j.end() && !it->is_null()) g.model = get_as<std::string>(*it, "model");

  const auto& members = field(j, "members", "");
  if (!members.is_array()) throw FieldError("members", "expected an array");
  for (std::size_t i = 0; i < members.size(); ++i)
    g.members.push_back(member_from_json(members[i], "members[" + std::to_string(i) + "]"));
  std::sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  if (auto it = j.find("transcript"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw FieldError("transcript", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string tp = "transcript[" + std::to_string(i) + "]";
      const auto& t = (*it)[i];
      g.transcript.push_back({required<std::string>(t, "speaker_alias", tp), required<int>(t, "turn_index", tp),
                              required<std::string>(t, "text", tp)});
    }
  }
  if (auto it = j.find("election"); it != j.end() && !it->is_null()) g.election = election_from_json(*it, "election");
  if (auto it = j.find("gap"); it != j.end() && !it->is_null()) g.gap = gap_from_json(*it, "gap", g.group_id);
  g.extra = leftovers(j, {"group_id", "treatment", "origin", "model", "members", "transcript", "election", "gap"});
  return g;
}

inline Json group_to_json(const GroupRecord& g) {
  auto members = g.members;
  std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  Json ms = Json::array();
  for (const auto& m : members) ms.push_back(detail::member_to_json(m));
  Json transcript = Json::array();
  for (const auto& t : g.transcript)
    transcript.push_back({{"speaker_alias", t.speaker_alias}, {"turn_index", t.turn_index}, {"text", t.text}});
  Json j = {{"group_id", g.group_id},
            {"treatment", to_string(g.treatment)},
            {"origin", to_string(g.origin)},
            {"members", std::move(ms)},
            {"transcript", std::move(transcript)}};
  if (g.model) j["model"] = *g.model;
  if (g.election) j["election"] = detail::election_to_json(*g.election);
  if (g.gap) j["gap"] = detail::gap_to_json(*g.gap);
  detail::merge_extra(j, g.extra);
  return j;
}

/// Read and validate a cohort. Groups that fail decoding or invariants are
/// left out of the result and reported in `diagnostics`; a bad header or a
/// schema-version mismatch throws.
inline IngestResult ingest_cohort(std::istream& in, std::string_view schema_version = kSchemaVersion) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<std::string> group_ids;
  std::set<ParticipantId> participant_ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      if (!have_header) throw ValidationError("line " + std::to_string(line_no) + ": invalid JSON header: " + e.what());
      result.diagnostics.push_back({line_no, {}, {}, std::string("invalid JSON: ") + e.what()});
      continue;
    }

    if (!have_header) {
      if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string())
        throw ValidationError("line " + std::to_string(line_no) + ": expected a {\"schema_version\": ...} header line");
      result.cohort.schema_version = j["schema_version"].get<std::string>();
      if (result.cohort.schema_version != schema_version)
        throw ValidationError("schema mismatch: file has version '" + result.cohort.schema_version +
                              "', expected '" + std::string(schema_version) + "'");
      result.cohort.header_extra = detail::leftovers(j, {"schema_version"});
      have_header = true;
      continue;
    }

    std::string gid;
    if (j.is_object() && j.contains("group_id") && j["group_id"].is_string()) gid = j["group_id"].get<std::string>();
    GroupRecord g;
    try {
      g = group_from_json(j);
    } catch (const detail::FieldError& e) {
      result.diagnostics.push_back({line_no, gid, e.path, e.what()});
      continue;
    } catch (const ValidationError& e) {
      result.diagnostics.push_back({line_no, gid, {}, e.what()});
      continue;
    }

    auto problems = check_group(g);
    if (!group_ids.insert(g.group_id).second) problems.push_back({"group_id", "duplicate group id"});
    for (const auto& m : g.members)
      if (participant_ids.contains(m.id))
        problems.push_back({"members", "participant '" + m.id.str() + "' already appears in another group"});
    if (!problems.empty()) {
      for (auto& p : problems) result.diagnostics.push_back({line_no, g.group_id, p.path, p.message});
      continue;
    }
    for (const auto& m : g.members) participant_ids.insert(m.id);
    result.cohort.groups.push_back(std::move(g));
  }
  if (!have_header) throw ValidationError("empty cohort file: missing schema_version header");
  return result;
}

inline void write_cohort(std::ostream& out, const Cohort& cohort) {
  Json header = {{"schema_version", cohort.schema_version}};
  detail::merge_extra(header, cohort.header_extra);
  out << header.dump() << '\n';
  for (const auto& g : cohort.groups) out << group_to_json(g).dump() << '\n';
}

inline std::string serialize_cohort(const Cohort& cohort) {
  std::ostringstream os;
  write_cohort(os, cohort);
  return os.str();
}

/// Strict file read: any diagnostic is an error.
inline Cohort read_cohort_file(const std::string& path, std::string_view schema_version = kSchemaVersion) {
  std::ifstream in(path);
  if (!in) throw SystemError("cannot open cohort file '" + path + "'");
  auto r = ingest_cohort(in, schema_version);
  if (!r.ok()) {
    std::string msg = "cohort '" + path + "' failed validation:";
    for (const auto& d : r.diagnostics) msg += "\n  " + d.str();
    throw ValidationError(msg);
  }
  return std::move(r.cohort);
}

inline void write_cohort_file(const std::string& path, const Cohort& cohort) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SystemError("cannot write '" + path + "'");
  write_cohort(out, cohort);
  if (!out) throw SystemError("write failed for '" + path + "'");
}

inline TaskKey read_task_key_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemError("cannot open task key '" + path + "'");
  try {
    return task_key_from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("task key '" + path + "': " + e.what());
  }
}

}  // namespace lostatsea
