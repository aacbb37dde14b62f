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

// Cohort data model: participants, groups, task keys, and the invariant
// checks every ingested or produced group must pass.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lostatsea/core.hpp"
#include "lostatsea/election.hpp"

namespace lostatsea {

using Json = nlohmann::json;

/// Lower-cased, whitespace-free pronoun string.
inline std::string normalize_pronouns(std::string_view pronouns) {
  std::string out;
  for (unsigned char c : pronouns)
    if (!std::isspace(c)) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

/// MALE exactly when the member chose "he/him"; every other choice is NON_MALE.
inline GenderCategory gender_from_pronouns(std::string_view pronouns) {
  return normalize_pronouns(pronouns) == "he/him" ? GenderCategory::kMale : GenderCategory::kNonMale;
}

struct IdentityProfile {
  std::string display_name;
  std::string avatar;
  std::string pronouns;
  Json extra = Json::object();

  GenderCategory gender_category() const { return gender_from_pronouns(pronouns); }
};

struct SurveyResponses {
  std::string survival_experience;
  std::string leadership_experience;
  int risk_willingness = 5;      // 0..10
  int gender_task_belief = 5;    // 1 = men better .. 10 = women better
  int gender_leader_belief = 5;  // same scale, for leadership
  Json extra = Json::object();
};

struct TranscriptMessage {
  std::string speaker_alias;
  int turn_index = 0;
  std::string text;
};

using AnswerMap = std::map<std::string, std::string>;

struct ParticipantRecord {
  ParticipantId id;
  IdentityProfile profile;
  std::optional<std::string> pseudonym;
  SurveyResponses survey;
  std::optional<AnswerMap> task_answers;
  std::optional<double> nomination;
  std::optional<std::vector<ParticipantId>> ballot;
  std::optional<TaskScore> score;
  Json extra = Json::object();

  GenderCategory gender() const { return profile.gender_category(); }

  /// Name the other members see under `treatment`.
  const std::string& visible_name(Treatment treatment) const {
    if (uses_pseudonyms(treatment)) {
      if (!pseudonym) throw ValidationError("participant '" + id.str() + "' has no pseudonym");
      return *pseudonym;
    }
    return profile.display_name;
  }
};

struct GroupRecord {
  std::string group_id;
  Treatment treatment = Treatment::kIdentified;
  Origin origin = Origin::kHuman;
  std::optional<std::string> model;  // provider model token for agent cohorts
  std::vector<ParticipantRecord> members;
  std::vector<TranscriptMessage> transcript;
  std::optional<ElectionOutcome> election;
  std::optional<GapReport> gap;
  Json extra = Json::object();

  const ParticipantRecord& member(const ParticipantId& id) const {
    for (const auto& m : members)
      if (m.id == id) return m;
    throw ValidationError("group '" + group_id + "' has no member '" + id.str() + "'");
  }
  ParticipantRecord& member(const ParticipantId& id) {
    return const_cast<ParticipantRecord&>(std::as_const(*this).member(id));
  }

  bool complete() const {
    if (!election || !gap) return false;
    return std::all_of(members.begin(), members.end(), [](const auto& m) {
      return m.nomination && m.ballot && m.score;
    });
  }

  std::vector<SelfNomination> nominations() const {
    std::vector<SelfNomination> out;
    for (const auto& m : members) {
      if (!m.nomination) throw ValidationError("group '" + group_id + "': '" + m.id.str() + "' has no nomination");
      out.push_back({m.id, *m.nomination});
    }
    return out;
  }

  std::vector<Ballot> ballots() const {
    std::vector<Ballot> out;
    for (const auto& m : members) {
      if (!m.ballot) throw ValidationError("group '" + group_id + "': '" + m.id.str() + "' has no ballot");
      out.push_back({m.id, *m.ballot});
    }
    return out;
  }

  std::vector<TaskScore> scores() const {
    std::vector<TaskScore> out;
    for (const auto& m : members) {
      if (!m.score) throw ValidationError("group '" + group_id + "': '" + m.id.str() + "' has no task score");
      out.push_back(*m.score);
    }
    return out;
  }
};

inline constexpr std::string_view kSchemaVersion = "1";

struct Cohort {
  std::string schema_version{kSchemaVersion};
  std::vector<GroupRecord> groups;
  Json header_extra = Json::object();
};

/// Keyed multiple-choice items of the representative task.
struct TaskKey {
  struct Item {
    std::string id;
    std::string answer;
    std::string prompt;                // optional question text shown to agents
    std::vector<std::string> options;  // optional; empty means free answer
  };
  std::vector<Item> items;
  int max_items = 0;

  const Item* find(std::string_view id) const {
    for (const auto& item : items)
      if (item.id == id) return &item;
    return nullptr;
  }

  void validate() const {
    if (max_items <= 0) throw ValidationError("task key: max_items must be positive");
    if (static_cast<std::size_t>(max_items) != items.size())
      throw ValidationError("task key: max_items " + std::to_string(max_items) + " != item count " +
                            std::to_string(items.size()));
    std::set<std::string> ids;
    for (const auto& item : items) {
      if (item.id.empty()) throw ValidationError("task key: empty question id");
      if (!ids.insert(item.id).second) throw ValidationError("task key: duplicate question id '" + item.id + "'");
      if (!item.options.empty() &&
          std::find(item.options.begin(), item.options.end(), item.answer) == item.options.end())
        throw ValidationError("task key: answer of '" + item.id + "' is not among its options");
    }
  }
};

/// Survival-item comparisons keyed by the conventional expert ranking of the
/// Lost at Sea exercise (signalling and water ahead of navigation gear).
/// Items beyond the sixth are generic placeholders.
inline TaskKey default_task_key(int max_items = 6) {
  struct Pair {
    const char* better;
    const char* worse;
  };
  static constexpr Pair kPairs[] = {
      {"shaving_mirror", "sextant"},     {"oil_gas_mixture", "ocean_maps"},
      {"water", "transistor_radio"},     {"army_rations", "mosquito_netting"},
      {"plastic_sheeting", "shark_repellent"}, {"chocolate_bars", "rum"},
  };
  if (max_items <= 0) throw ValidationError("task key: max_items must be positive");
  TaskKey key;
  key.max_items = max_items;
  for (int i = 0; i < max_items; ++i) {
    TaskKey::Item item;
    item.id = "q" + std::to_string(i + 1);
    if (i < 6) {
      const auto& p = kPairs[i];
      // Alternate option order so the keyed answer is not always first.
      item.options = i % 2 == 0 ? std::vector<std::string>{p.better, p.worse}
                                : std::vector<std::string>{p.worse, p.better};
      item.answer = p.better;
      item.prompt = "Stranded on a life raft, which item is more important for survival?";
    } else {
      item.options = {"option_a", "option_b"};
      item.answer = "option_a";
      item.prompt = "Placeholder item " + std::to_string(i + 1) + ".";
    }
    key.items.push_back(std::move(item));
  }
  return key;
}

inline TaskKey task_key_from_json(const Json& j) {
  TaskKey key;
  try {
    key.max_items = j.at("max_items").get<int>();
    for (const auto& it : j.at("items")) {
      TaskKey::Item item;
      item.id = it.at("id").get<std::string>();
      item.answer = it.at("answer").get<std::string>();
      if (it.contains("prompt")) item.prompt = it.at("prompt").get<std::string>();
      if (it.contains("options")) item.options = it.at("options").get<std::vector<std::string>>();
      key.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("task key: ") + e.what());
  }
  key.validate();
  return key;
}

inline Json task_key_to_json(const TaskKey& key) {
  Json items = Json::array();
  for (const auto& item : key.items) {
    Json it = {{"id", item.id}, {"answer", item.answer}};
    if (!item.prompt.empty()) it["prompt"] = item.prompt;
    if (!item.options.empty()) it["options"] = item.options;
    items.push_back(std::move(it));
  }
  return {{"items", std::move(items)}, {"max_items", key.max_items}};
}

// ---------------------------------------------------------------------------
// Invariant checks

/// One invariant violation, located by a field path inside the group.
struct Problem {
  std::string path;
  std::string message;
};

namespace detail {

inline void check_range(std::vector<Problem>& out, const std::string& path, int v, int lo, int hi) {
  if (v < lo || v > hi)
    out.push_back({path, std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"});
}

}  // namespace detail

/// All invariant violations of `g`; empty means valid.
inline std::vector<Problem> check_group(const GroupRecord& g) {
  std::vector<Problem> out;
  if (g.group_id.empty()) out.push_back({"group_id", "must be non-empty"});
  if (g.members.size() != kGroupSize) {
    out.push_back({"members", "expected " + std::to_string(kGroupSize) + " members, found " +
                                  std::to_string(g.members.size())});
    return out;
  }
  if (g.treatment == Treatment::kNoDemographics && g.origin == Origin::kHuman)
    out.push_back({"treatment", "no_demographics applies only to simulated cohorts"});

  std::set<ParticipantId> ids;
  std::set<std::string> visible;
  int males = 0;
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto& m = g.members[i];
    const std::string p = "members[" + std::to_string(i) + "]";
    if (m.id.empty()) out.push_back({p + ".id", "must be non-empty"});
    else if (!ids.insert(m.id).second) out.push_back({p + ".id", "duplicate id '" + m.id.str() + "'"});
    if (m.gender() == GenderCategory::kMale) ++males;

    if (uses_pseudonyms(g.treatment)) {
      if (!m.pseudonym || m.pseudonym->empty())
        out.push_back({p + ".pseudonym", "required under " + std::string(to_string(g.treatment))});
      else if (!visible.insert(*m.pseudonym).second)
        out.push_back({p + ".pseudonym", "duplicate alias '" + *m.pseudonym + "'"});
    } else {
      if (m.pseudonym) out.push_back({p + ".pseudonym", "not allowed under identified treatment"});
      if (m.profile.display_name.empty()) out.push_back({p + ".profile.name", "must be non-empty"});
      else if (!visible.insert(m.profile.display_name).second)
        out.push_back({p + ".profile.name", "duplicate display name '" + m.profile.display_name + "'"});
    }

    detail::check_range(out, p + ".survey.risk_willingness", m.survey.risk_willingness, 0, 10);
    detail::check_range(out, p + ".survey.gender_task_belief", m.survey.gender_task_belief, 1, 10);
    detail::check_range(out, p + ".survey.gender_leader_belief", m.survey.gender_leader_belief, 1, 10);

    if (m.nomination && !(std::isfinite(*m.nomination) && *m.nomination >= kMinNomination &&
                          *m.nomination <= kMaxNomination))
      out.push_back({p + ".nomination", std::to_string(*m.nomination) + " outside [0, 10]"});
    if (m.score) {
      if (m.score->participant != m.id) out.push_back({p + ".score", "participant mismatch"});
      if (m.score->max_items <= 0) out.push_back({p + ".score.max_items", "must be positive"});
      else detail::check_range(out, p + ".score.correct", m.score->correct, 0, m.score->max_items);
    }
  }
  if (males != 2)
    out.push_back({"members", "expected 2 male and 2 non-male members, found " + std::to_string(males) + " male"});

  int last_turn = -1;
  for (std::size_t i = 0; i < g.transcript.size(); ++i) {
    const auto& msg = g.transcript[i];
    const std::string p = "transcript[" + std::to_string(i) + "]";
    if (msg.turn_index <= last_turn) out.push_back({p + ".turn_index", "must be strictly increasing"});
    last_turn = msg.turn_index;
    if (!visible.contains(msg.speaker_alias))
      out.push_back({p + ".speaker_alias", "'" + msg.speaker_alias + "' is not a visible group identity"});
  }

  for (std::size_t i = 0; i < g.members.size(); ++i) {
    const auto& m = g.members[i];
    if (!m.ballot) continue;
    std::set<ParticipantId> ranked;
    for (const auto& r : *m.ballot) {
      if (!ids.contains(r))
        out.push_back({"members[" + std::to_string(i) + "].ballot", "'" + r.str() + "' is not a member"});
      else if (!ranked.insert(r).second)
        out.push_back({"members[" + std::to_string(i) + "].ballot", "'" + r.str() + "' ranked twice"});
    }
  }
  if (g.election) {
    const auto& e = *g.election;
    if (e.candidates.size() < 2) out.push_back({"election.candidates", "need at least 2 candidates"});
    for (const auto& c : e.candidates.members)
      if (!ids.contains(c)) out.push_back({"election.candidates", "'" + c.str() + "' is not a member"});
    if (!e.candidates.contains(e.elected))
      out.push_back({"election.elected", "'" + e.elected.str() + "' is not a candidate"});
    if (e.tiebreak_trace.empty()) out.push_back({"election.tiebreak_trace", "must be non-empty"});
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      const auto& m = g.members[i];
      if (!m.ballot) continue;
      try {
        validate_ballot({m.id, *m.ballot}, e.candidates);
      } catch (const ValidationError& err) {
        out.push_back({"members[" + std::to_string(i) + "].ballot", err.what()});
      }
    }
  }
  if (g.gap) {
    const auto& gap = *g.gap;
    if (gap.delta_total != gap.delta_self + gap.delta_peer)
      out.push_back({"gap", "delta_total != delta_self + delta_peer"});
    if (gap.delta_self != 0 && gap.delta_peer != 0) out.push_back({"gap", "both components nonzero"});
    if (gap.delta_total < 0 || gap.delta_self < 0 || gap.delta_peer < 0)
      out.push_back({"gap", "negative component"});
    if (!g.election) {
      out.push_back({"gap", "present without an election"});
    } else if (std::all_of(g.members.begin(), g.members.end(), [](const auto& m) { return m.score.has_value(); }) &&
               g.election->candidates.contains(g.election->elected)) {
      try {
        const auto expect = leader_gap(g.scores(), g.election->candidates, g.election->elected, gap.max_items);
        if (expect.delta_total != gap.delta_total || expect.delta_self != gap.delta_self ||
            expect.delta_peer != gap.delta_peer || expect.optimal_set != gap.optimal_set)
          out.push_back({"gap", "does not match the gap recomputed from task scores"});
      } catch (const ValidationError& e) {
        out.push_back({"gap", e.what()});
      }
    }
  }
  if (g.election && std::all_of(g.members.begin(), g.members.end(), [](const auto& m) { return m.nomination.has_value(); })) {
    // No non-candidate may out-nominate a candidate.
    double lowest_candidate = kMaxNomination;
    double highest_other = kMinNomination - 1.0;
    for (const auto& m : g.members) {
      if (g.election->candidates.contains(m.id)) lowest_candidate = std::min(lowest_candidate, *m.nomination);
      else highest_other = std::max(highest_other, *m.nomination);
    }
    if (highest_other > lowest_candidate)
      out.push_back({"election.candidates", "a non-candidate has a higher self-nomination than a candidate"});
  }
  return out;
}

inline std::string describe(const std::vector<Problem>& problems) {
  std::string s;
  for (const auto& p : problems) {
    if (!s.empty()) s += "; ";
    s += p.path + ": " + p.message;
  }
  return s;
}

inline void validate_group(const GroupRecord& g) {
  auto problems = check_group(g);
  if (!problems.empty()) throw ValidationError("group '" + g.group_id + "': " + describe(problems));
}

}  // namespace lostatsea
