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

// Leader election for a four-member group.
//
// Members self-nominate with a willingness score W in [0, 10]; the two highest
// W form the candidate set. Everyone ranks the candidates, and the leader is
// the strict Condorcet winner when one exists. Otherwise the cascade is
// Borda count, then highest W, then a seeded draw, each step recorded in the
// outcome's trace. After the task, the optimal leader gap measures how far the
// elected leader's score falls short of the best member's, split into a
// self-exclusion part (best member never became a candidate) and a
// peer-exclusion part (best member was a candidate but lost the vote).

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lostatsea/core.hpp"

namespace lostatsea {

struct SelfNomination {
  ParticipantId participant;
  double score = 0.0;
};

struct TaskScore {
  ParticipantId participant;
  int correct = 0;
  int max_items = 0;
};

/// How a W tie straddling the top-two cutoff was settled.
enum class CutoffResolution {
  kNone,        // no tie at the cutoff
  kSeededDraw,  // tied members drawn with the seed
  kExpanded,    // every tied member admitted
  kRecorded,    // taken from a stored (replayed) record
};

enum class CutoffTiePolicy { kSeededDraw, kExpand };

inline std::string_view to_string(CutoffResolution r) noexcept {
  switch (r) {
    case CutoffResolution::kNone: return "none";
    case CutoffResolution::kSeededDraw: return "seeded_draw";
    case CutoffResolution::kExpanded: return "expanded";
    case CutoffResolution::kRecorded: return "recorded";
  }
  return "?";
}

inline CutoffResolution parse_cutoff_resolution(std::string_view s) {
  if (s == "none") return CutoffResolution::kNone;
  if (s == "seeded_draw") return CutoffResolution::kSeededDraw;
  if (s == "expanded") return CutoffResolution::kExpanded;
  if (s == "recorded") return CutoffResolution::kRecorded;
  throw ValidationError("unknown cutoff resolution '" + std::string(s) + "'");
}

struct SelectionTrace {
  std::vector<SelfNomination> ranked;          // descending W, ties by id
  double cutoff_score = 0.0;                   // W of the second-ranked member
  std::vector<ParticipantId> tied_at_cutoff;   // set only when a tie had to be resolved
  CutoffResolution resolution = CutoffResolution::kNone;
  std::uint64_t seed = 0;
};

/// Eligible candidates: descending W, then draw order for members tied at the cutoff.
struct CandidateSet {
  std::vector<ParticipantId> members;
  SelectionTrace trace;

  std::size_t size() const noexcept { return members.size(); }
  bool contains(const ParticipantId& id) const {
    return std::find(members.begin(), members.end(), id) != members.end();
  }
};

struct Ballot {
  ParticipantId voter;
  std::vector<ParticipantId> ranking;  // most preferred first
};

enum class TieBreakRule { kCondorcet, kBorda, kHighestW, kSeededDraw };

inline std::string_view to_string(TieBreakRule r) noexcept {
  switch (r) {
    case TieBreakRule::kCondorcet: return "condorcet";
    case TieBreakRule::kBorda: return "borda";
    case TieBreakRule::kHighestW: return "highest_W";
    case TieBreakRule::kSeededDraw: return "seeded_draw";
  }
  return "?";
}

inline TieBreakRule parse_tiebreak_rule(std::string_view s) {
  if (s == "condorcet") return TieBreakRule::kCondorcet;
  if (s == "borda") return TieBreakRule::kBorda;
  if (s == "highest_W") return TieBreakRule::kHighestW;
  if (s == "seeded_draw") return TieBreakRule::kSeededDraw;
  throw ValidationError("unknown tie-break rule '" + std::string(s) + "'");
}

/// Head-to-head counts: at(x, y) is the number of ballots ranking x above y.
class PairwiseMatrix {
 public:
  PairwiseMatrix() = default;
  explicit PairwiseMatrix(std::vector<ParticipantId> candidates)
      : candidates_(std::move(candidates)), wins_(candidates_.size() * candidates_.size(), 0) {}

  const std::vector<ParticipantId>& candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }

  int at(std::size_t i, std::size_t j) const { return wins_.at(i * size() + j); }
  int& at(std::size_t i, std::size_t j) { return wins_.at(i * size() + j); }
  int at(const ParticipantId& x, const ParticipantId& y) const { return at(index_of(x), index_of(y)); }

  std::size_t index_of(const ParticipantId& id) const {
    auto it = std::find(candidates_.begin(), candidates_.end(), id);
    if (it == candidates_.end()) throw ValidationError("'" + id.str() + "' is not a candidate");
    return static_cast<std::size_t>(it - candidates_.begin());
  }

  friend bool operator==(const PairwiseMatrix&, const PairwiseMatrix&) = default;

 private:
  std::vector<ParticipantId> candidates_;
  std::vector<int> wins_;
};

struct ElectionOutcome {
  CandidateSet candidates;
  PairwiseMatrix pairwise;
  std::map<ParticipantId, int> borda;
  ParticipantId elected;
  std::vector<TieBreakRule> tiebreak_trace;  // rules tried in order; the last one decided

  TieBreakRule decided_by() const { return tiebreak_trace.back(); }
};

/// Optimal leader gap in raw score units.
struct GapReport {
  std::string group;
  std::vector<ParticipantId> optimal_set;
  int delta_total = 0;
  int delta_self = 0;
  int delta_peer = 0;
  int max_items = 1;

  double normalized_total() const { return static_cast<double>(delta_total) / max_items; }
  double normalized_self() const { return static_cast<double>(delta_self) / max_items; }
  double normalized_peer() const { return static_cast<double>(delta_peer) / max_items; }
};

namespace detail {

inline void check_unique(std::span<const ParticipantId> ids, std::string_view what) {
  std::set<ParticipantId> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw ValidationError(std::string(what) + ": empty participant id");
    if (!seen.insert(id).second)
      throw ValidationError(std::string(what) + ": duplicate participant '" + id.str() + "'");
  }
}

inline void check_nominations(std::span<const SelfNomination> nominations) {
  if (nominations.size() != kGroupSize)
    throw ValidationError("expected " + std::to_string(kGroupSize) + " self-nominations, got " +
                          std::to_string(nominations.size()));
  std::vector<ParticipantId> ids;
  for (const auto& n : nominations) {
    if (!std::isfinite(n.score) || n.score < kMinNomination || n.score > kMaxNomination)
      throw ValidationError("self-nomination of '" + n.participant.str() + "' is " +
                            std::to_string(n.score) + ", outside [0, 10]");
    ids.push_back(n.participant);
  }
  check_unique(ids, "self-nominations");
}

inline double nomination_of(std::span<const SelfNomination> nominations, const ParticipantId& id) {
  for (const auto& n : nominations)
    if (n.participant == id) return n.score;
  throw ValidationError("no self-nomination for '" + id.str() + "'");
}

}  // namespace detail

/// Top-two candidates by W. A tie at the cutoff is settled per `policy`; the
/// default draws with `seed`, so identical inputs give identical output.
inline CandidateSet select_candidates(std::span<const SelfNomination> nominations, std::uint64_t seed,
                                      CutoffTiePolicy policy = CutoffTiePolicy::kSeededDraw) {
  detail::check_nominations(nominations);

  CandidateSet out;
  auto& trace = out.trace;
  trace.seed = seed;
  trace.ranked.assign(nominations.begin(), nominations.end());
  std::sort(trace.ranked.begin(), trace.ranked.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.participant < b.participant;
  });
  trace.cutoff_score = trace.ranked[1].score;

  std::vector<ParticipantId> above, at;
  for (const auto& n : trace.ranked) {
    if (n.score > trace.cutoff_score) above.push_back(n.participant);
    else if (n.score == trace.cutoff_score) at.push_back(n.participant);
  }
  const std::size_t slots = 2 - above.size();
  out.members = above;

  if (at.size() == slots) {
    out.members.insert(out.members.end(), at.begin(), at.end());
    return out;
  }

  trace.tied_at_cutoff = at;
  if (policy == CutoffTiePolicy::kExpand) {
    trace.resolution = CutoffResolution::kExpanded;
    out.members.insert(out.members.end(), at.begin(), at.end());
  } else {
    trace.resolution = CutoffResolution::kSeededDraw;
    Engine engine(seed);
    auto order = at;
    seeded_shuffle(order, engine);
    out.members.insert(out.members.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(slots));
  }
  return out;
}

/// Throws unless `ballot` ranks every candidate exactly once.
inline void validate_ballot(const Ballot& ballot, const CandidateSet& candidates) {
  const std::string who = "ballot of '" + ballot.voter.str() + "'";
  if (ballot.ranking.size() != candidates.size())
    throw ValidationError(who + " ranks " + std::to_string(ballot.ranking.size()) + " of " +
                          std::to_string(candidates.size()) + " candidates");
  detail::check_unique(ballot.ranking, who);
  for (const auto& id : ballot.ranking)
    if (!candidates.contains(id)) throw ValidationError(who + " ranks non-candidate '" + id.str() + "'");
}

inline PairwiseMatrix pairwise_matrix(std::span<const Ballot> ballots, const CandidateSet& candidates) {
  PairwiseMatrix m(candidates.members);
  std::vector<std::size_t> position(candidates.size());
  for (const auto& b : ballots) {
    validate_ballot(b, candidates);
    for (std::size_t r = 0; r < b.ranking.size(); ++r) position[m.index_of(b.ranking[r])] = r;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        if (i != j && position[i] < position[j]) ++m.at(i, j);
  }
  return m;
}

/// C-1 points for a ballot's first choice down to 0 for its last.
inline std::map<ParticipantId, int> borda_scores(std::span<const Ballot> ballots,
                                                 const CandidateSet& candidates) {
  std::map<ParticipantId, int> totals;
  for (const auto& c : candidates.members) totals[c] = 0;
  const int top = static_cast<int>(candidates.size()) - 1;
  for (const auto& b : ballots) {
    validate_ballot(b, candidates);
    for (std::size_t r = 0; r < b.ranking.size(); ++r) totals[b.ranking[r]] += top - static_cast<int>(r);
  }
  return totals;
}

/// Candidate beating every other candidate strictly head-to-head, if any.
inline std::optional<ParticipantId> condorcet_winner(const PairwiseMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool beats_all = true;
    for (std::size_t j = 0; j < m.size() && beats_all; ++j)
      if (i != j && m.at(i, j) <= m.at(j, i)) beats_all = false;
    if (beats_all) return m.candidates()[i];
  }
  return std::nullopt;
}

inline ElectionOutcome resolve_election(std::span<const Ballot> ballots, const CandidateSet& candidates,
                                        std::span<const SelfNomination> nominations, std::uint64_t seed) {
  detail::check_nominations(nominations);
  if (candidates.size() < 2)
    throw ValidationError("candidate set needs at least 2 members, got " + std::to_string(candidates.size()));
  detail::check_unique(candidates.members, "candidate set");
  for (const auto& c : candidates.members) detail::nomination_of(nominations, c);
  if (ballots.size() != kGroupSize)
    throw ValidationError("expected " + std::to_string(kGroupSize) + " ballots, got " +
                          std::to_string(ballots.size()));
  std::vector<ParticipantId> voters;
  for (const auto& b : ballots) {
    detail::nomination_of(nominations, b.voter);
    voters.push_back(b.voter);
  }
  detail::check_unique(voters, "ballots");

  ElectionOutcome out;
  out.candidates = candidates;
  out.pairwise = pairwise_matrix(ballots, candidates);
  out.borda = borda_scores(ballots, candidates);

  out.tiebreak_trace.push_back(TieBreakRule::kCondorcet);
  if (auto w = condorcet_winner(out.pairwise)) {
    out.elected = *w;
    return out;
  }

  // Remaining contenders, kept in canonical id order.
  std::vector<ParticipantId> pool(candidates.members);
  std::sort(pool.begin(), pool.end());

  auto keep_max = [&pool](auto&& value_of) {
    auto best = value_of(pool.front());
    for (const auto& id : pool) best = std::max(best, value_of(id));
    std::erase_if(pool, [&](const ParticipantId& id) { return value_of(id) != best; });
  };

  out.tiebreak_trace.push_back(TieBreakRule::kBorda);
  keep_max([&](const ParticipantId& id) { return out.borda.at(id); });
  if (pool.size() == 1) {
    out.elected = pool.front();
    return out;
  }

  out.tiebreak_trace.push_back(TieBreakRule::kHighestW);
  keep_max([&](const ParticipantId& id) { return detail::nomination_of(nominations, id); });
  if (pool.size() == 1) {
    out.elected = pool.front();
    return out;
  }

  out.tiebreak_trace.push_back(TieBreakRule::kSeededDraw);
  Engine engine(seed);
  out.elected = pool[uniform_index(engine, pool.size())];
  return out;
}

namespace detail {

inline void check_scores(std::span<const TaskScore> scores) {
  if (scores.size() != kGroupSize)
    throw ValidationError("expected " + std::to_string(kGroupSize) + " task scores, got " +
                          std::to_string(scores.size()));
  std::vector<ParticipantId> ids;
  for (const auto& s : scores) {
    if (s.max_items <= 0) throw ValidationError("task score of '" + s.participant.str() + "': max_items must be positive");
    if (s.correct < 0 || s.correct > s.max_items)
      throw ValidationError("task score of '" + s.participant.str() + "' is " + std::to_string(s.correct) +
                            ", outside [0, " + std::to_string(s.max_items) + "]");
    if (s.max_items != scores.front().max_items)
      throw ValidationError("task scores disagree on max_items");
    ids.push_back(s.participant);
  }
  check_unique(ids, "task scores");
}

}  // namespace detail

/// All members sharing the highest task score, in id order.
inline std::vector<ParticipantId> optimal_leaders(std::span<const TaskScore> scores) {
  detail::check_scores(scores);
  int best = scores.front().correct;
  for (const auto& s : scores) best = std::max(best, s.correct);
  std::vector<ParticipantId> out;
  for (const auto& s : scores)
    if (s.correct == best) out.push_back(s.participant);
  std::sort(out.begin(), out.end());
  return out;
}

inline GapReport leader_gap(std::span<const TaskScore> scores, const CandidateSet& candidates,
                            const ParticipantId& elected, int max_items, std::string group = {}) {
  detail::check_scores(scores);
  if (max_items <= 0) throw ValidationError("max_items must be positive");
  if (scores.front().max_items != max_items)
    throw ValidationError("max_items " + std::to_string(max_items) + " disagrees with task scores (" +
                          std::to_string(scores.front().max_items) + ")");
  if (!candidates.contains(elected))
    throw ValidationError("elected '" + elected.str() + "' is not in the candidate set");

  GapReport gap;
  gap.group = std::move(group);
  gap.max_items = max_items;
  gap.optimal_set = optimal_leaders(scores);

  int best = 0;
  std::optional<int> elected_score;
  for (const auto& s : scores) {
    best = std::max(best, s.correct);
    if (s.participant == elected) elected_score = s.correct;
  }
  if (!elected_score) throw ValidationError("no task score for elected '" + elected.str() + "'");
  gap.delta_total = best - *elected_score;
  if (gap.delta_total == 0) return gap;

  const bool optimal_eligible = std::any_of(gap.optimal_set.begin(), gap.optimal_set.end(),
                                            [&](const ParticipantId& id) { return candidates.contains(id); });
  if (optimal_eligible) gap.delta_peer = gap.delta_total;
  else gap.delta_self = gap.delta_total;
  return gap;
}

}  // namespace lostatsea
