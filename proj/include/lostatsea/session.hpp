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

// Group formation and the five-stage session:
//   PROFILE -> DISCUSSION -> SELF_NOMINATION -> ELECTION_BALLOT -> TASK.
// A StageResponder supplies each member's output per stage; human replay reads
// stored answers, agent simulation asks a model.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lostatsea/election.hpp"
#include "lostatsea/records.hpp"

namespace lostatsea {

/// Shuffle each gender pool with `seed` and deal two of each into every group.
/// Members of each returned group are in id order.
inline std::vector<std::vector<ParticipantRecord>> stratify_groups(std::vector<ParticipantRecord> participants,
                                                                   std::uint64_t seed) {
  std::vector<ParticipantRecord> male, non_male;
  std::set<ParticipantId> seen;
  for (auto& p : participants) {
    if (!seen.insert(p.id).second) throw ValidationError("duplicate participant '" + p.id.str() + "'");
    (p.gender() == GenderCategory::kMale ? male : non_male).push_back(std::move(p));
  }
  if ((male.size() + non_male.size()) % kGroupSize != 0 || male.size() != non_male.size())
    throw ValidationError("cannot form 2/2 groups from " + std::to_string(male.size()) + " male and " +
                          std::to_string(non_male.size()) + " non-male participants");

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(male.begin(), male.end(), by_id);
  std::sort(non_male.begin(), non_male.end(), by_id);
  Engine engine(seed);
  seeded_shuffle(male, engine);
  seeded_shuffle(non_male, engine);

  std::vector<std::vector<ParticipantRecord>> groups;
  for (std::size_t i = 0; i < male.size(); i += 2) {
    std::vector<ParticipantRecord> g = {male[i], male[i + 1], non_male[i], non_male[i + 1]};
    std::sort(g.begin(), g.end(), by_id);
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Gender-neutral animal aliases.
inline const std::vector<std::string>& default_pseudonym_roster() {
  static const std::vector<std::string> roster = {
      "Bear", "Cat", "Fox", "Owl", "Elk", "Otter", "Heron", "Lynx", "Badger", "Crane", "Seal", "Wren"};
  return roster;
}

namespace detail {

inline bool is_gendered_token(std::string_view token) {
  static const std::set<std::string, std::less<>> kGendered = {
      "he",   "him",   "his",  "she",     "her",   "hers",  "man",  "woman", "men",   "women",
      "male", "female", "boy", "girl",    "king",  "queen", "lord", "lady",  "mr",    "mrs",
      "ms",   "sir",   "madam", "brother", "sister", "father", "mother", "son", "daughter",
      "bull", "cow",   "stallion", "mare", "rooster", "hen", "drake", "doe", "buck", "ram", "ewe"};
  std::string lower;
  for (unsigned char c : token) lower.push_back(static_cast<char>(std::tolower(c)));
  return kGendered.contains(lower);
}

}  // namespace detail

/// Give each member a distinct alias drawn with `seed` from `roster`.
inline GroupRecord assign_pseudonyms(GroupRecord group, const std::vector<std::string>& roster, std::uint64_t seed) {
  if (!uses_pseudonyms(group.treatment))
    throw ValidationError("group '" + group.group_id + "': pseudonyms require a pseudonymous treatment");
  if (roster.size() < kGroupSize)
    throw ValidationError("pseudonym roster has " + std::to_string(roster.size()) + " aliases, need at least " +
                          std::to_string(kGroupSize));
  std::set<std::string> unique;
  for (const auto& alias : roster) {
    if (alias.empty()) throw ValidationError("pseudonym roster contains an empty alias");
    if (detail::is_gendered_token(alias)) throw ValidationError("pseudonym roster contains gendered alias '" + alias + "'");
    if (!unique.insert(alias).second) throw ValidationError("pseudonym roster repeats '" + alias + "'");
  }
  std::vector<std::string> pool(roster);
  Engine engine(seed);
  seeded_shuffle(pool, engine);
  std::sort(group.members.begin(), group.members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < group.members.size(); ++i) group.members[i].pseudonym = pool[i];
  return group;
}

/// Count of answers matching the key. Missing answers count as incorrect.
inline TaskScore score_task(const ParticipantId& participant, const AnswerMap& answers, const TaskKey& key) {
  key.validate();
  TaskScore s{participant, 0, key.max_items};
  for (const auto& [qid, answer] : answers) {
    const auto* item = key.find(qid);
    if (!item) throw ValidationError("answers of '" + participant.str() + "' name unknown question '" + qid + "'");
    if (answer == item->answer) ++s.correct;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Session

struct TaskResponse {
  std::optional<AnswerMap> answers;  // scored against the session's key
  std::optional<TaskScore> score;    // used as-is when no answers are given
};

/// One member's output for one stage: nothing or free text for PROFILE and
/// DISCUSSION, W for SELF_NOMINATION, a ranking for ELECTION_BALLOT and a
/// TaskResponse for TASK.
using StageValue = std::variant<std::monostate, std::string, double, std::vector<ParticipantId>, TaskResponse>;

struct SessionView {
  const GroupRecord& group;
  const CandidateSet* candidates = nullptr;  // set from ELECTION_BALLOT on
  const TaskKey* key = nullptr;
};

class StageResponder {
 public:
  virtual ~StageResponder() = default;
  virtual StageValue respond(const SessionView& view, const ParticipantRecord& member, StageId stage) = 0;
};

/// Replays the answers stored on each participant record.
class ReplayResponder final : public StageResponder {
 public:
  StageValue respond(const SessionView&, const ParticipantRecord& m, StageId stage) override {
    switch (stage) {
      case StageId::kProfile:
      case StageId::kDiscussion:
        return std::monostate{};
      case StageId::kSelfNomination:
        if (!m.nomination) throw ValidationError("replay: '" + m.id.str() + "' has no stored nomination");
        return *m.nomination;
      case StageId::kElectionBallot:
        if (!m.ballot) throw ValidationError("replay: '" + m.id.str() + "' has no stored ballot");
        return *m.ballot;
      case StageId::kTask: {
        TaskResponse r;
        if (m.task_answers) r.answers = *m.task_answers;
        else if (m.score) r.score = *m.score;
        else throw ValidationError("replay: '" + m.id.str() + "' has no stored task answers or score");
        return r;
      }
    }
    return std::monostate{};
  }
};

struct SessionOptions {
  const TaskKey* key = nullptr;
  CutoffTiePolicy cutoff_policy = CutoffTiePolicy::kSeededDraw;
  // Reuse a stored candidate set (human replay) when it is consistent with
  // the nominations, instead of redrawing a cutoff tie.
  bool honor_recorded_candidates = false;
};

namespace detail {

template <typename T>
const T& expect_value(const StageValue& v, const ParticipantRecord& m, StageId stage) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw ValidationError("session aborted: responder returned the wrong kind of value for '" + m.id.str() +
                        "' at " + std::string(to_string(stage)));
}

inline bool candidates_consistent(const CandidateSet& c, std::span<const SelfNomination> nominations) {
  if (c.size() < 2) return false;
  double lowest_in = kMaxNomination, highest_out = kMinNomination - 1.0;
  for (const auto& n : nominations) {
    if (c.contains(n.participant)) lowest_in = std::min(lowest_in, n.score);
    else highest_out = std::max(highest_out, n.score);
  }
  for (const auto& id : c.members)
    if (std::none_of(nominations.begin(), nominations.end(), [&](const auto& n) { return n.participant == id; }))
      return false;
  return highest_out <= lowest_in;
}

}  // namespace detail

/// Run all five stages in order and return the completed record. Derived
/// artifacts (candidates, election, scores, gap) are recomputed from the
/// responder's outputs; `seed` drives every tie-break draw.
inline GroupRecord run_session(const GroupRecord& group, StageResponder& responder, std::uint64_t seed,
                               const SessionOptions& options = {}) {
  validate_group(group);
  GroupRecord g = group;
  std::sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::optional<CandidateSet> recorded;
  if (group.election) recorded = group.election->candidates;
  g.election.reset();
  g.gap.reset();

  std::optional<CandidateSet> candidates;
  const std::string where = "session '" + g.group_id + "'";

  for (StageId stage : kStageOrder) {
    SessionView view{g, candidates ? &*candidates : nullptr, options.key};
    std::vector<StageValue> outputs;
    for (const auto& m : g.members) outputs.push_back(responder.respond(view, m, stage));

    switch (stage) {
      case StageId::kProfile:
      case StageId::kDiscussion:
        break;

      case StageId::kSelfNomination: {
        for (std::size_t i = 0; i < g.members.size(); ++i) {
          auto& m = g.members[i];
          const double w = detail::expect_value<double>(outputs[i], m, stage);
          if (!std::isfinite(w) || w < kMinNomination || w > kMaxNomination)
            throw ValidationError(where + " aborted: self-nomination of '" + m.id.str() + "' is " +
                                  std::to_string(w) + ", outside [0, 10]");
          m.nomination = w;
        }
        const auto nominations = g.nominations();
        if (options.honor_recorded_candidates && recorded && detail::candidates_consistent(*recorded, nominations)) {
          candidates = select_candidates(nominations, derive_seed(seed, "candidates"), options.cutoff_policy);
          if (candidates->members != recorded->members) {
            candidates->members = recorded->members;
            candidates->trace.resolution = CutoffResolution::kRecorded;
          }
        } else {
          candidates = select_candidates(nominations, derive_seed(seed, "candidates"), options.cutoff_policy);
        }
        break;
      }

      case StageId::kElectionBallot: {
        for (std::size_t i = 0; i < g.members.size(); ++i) {
          auto& m = g.members[i];
          const auto& ranking = detail::expect_value<std::vector<ParticipantId>>(outputs[i], m, stage);
          try {
            validate_ballot({m.id, ranking}, *candidates);
          } catch (const ValidationError& e) {
            throw ValidationError(where + " aborted: " + e.what());
          }
          m.ballot = ranking;
        }
        g.election = resolve_election(g.ballots(), *candidates, g.nominations(), derive_seed(seed, "election"));
        break;
      }

      case StageId::kTask: {
        for (std::size_t i = 0; i < g.members.size(); ++i) {
          auto& m = g.members[i];
          const auto& r = detail::expect_value<TaskResponse>(outputs[i], m, stage);
          if (r.answers) {
            if (!options.key) throw ValidationError(where + ": task answers supplied but no task key configured");
            m.task_answers = *r.answers;
            m.score = score_task(m.id, *r.answers, *options.key);
          } else if (r.score) {
            TaskScore s = *r.score;
            s.participant = m.id;
            if (s.max_items <= 0 || s.correct < 0 || s.correct > s.max_items)
              throw ValidationError(where + " aborted: task score of '" + m.id.str() + "' out of range");
            m.score = s;
          } else {
            throw ValidationError(where + " aborted: no task output for '" + m.id.str() + "'");
          }
        }
        const auto scores = g.scores();
        g.gap = leader_gap(scores, g.election->candidates, g.election->elected, scores.front().max_items, g.group_id);
        break;
      }
    }
  }
  validate_group(g);
  return g;
}

// ---------------------------------------------------------------------------
// Payout

/// Currency amount in integer cents.
struct Money {
  std::int64_t cents = 0;

  static Money from_units(double units) { return Money{static_cast<std::int64_t>(std::llround(units * 100.0))}; }
  double units() const { return static_cast<double>(cents) / 100.0; }
  std::string str() const {
    const auto abs = cents < 0 ? -cents : cents;
    std::string frac = std::to_string(abs % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (cents < 0 ? "-" : "") + std::to_string(abs / 100) + "." + frac;
  }
  friend bool operator==(const Money&, const Money&) = default;
  friend auto operator<=>(const Money&, const Money&) = default;
};

/// Every member receives base + bonus_max * S(elected) / max_items, rounded
/// to the cent: the group is paid through its leader's performance.
inline std::map<ParticipantId, Money> payout_preview(const GroupRecord& group, Money base, Money bonus_max) {
  if (!group.complete()) throw ValidationError("payout: group '" + group.group_id + "' is incomplete");
  const auto& leader = group.member(group.election->elected);
  const auto& s = *leader.score;
  const auto bonus = static_cast<std::int64_t>(
      std::llround(static_cast<double>(bonus_max.cents) * s.correct / static_cast<double>(s.max_items)));
  std::map<ParticipantId, Money> out;
  for (const auto& m : group.members) out[m.id] = Money{base.cents + bonus};
  return out;
}

}  // namespace lostatsea
