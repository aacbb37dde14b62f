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

// Synthetic cohorts with tunable gender effects, and brute-force oracles that
// share no code with the election and statistics modules they check.

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "lostatsea/session.hpp"
#include "lostatsea/simulate.hpp"

namespace lostatsea::synth {

struct SynthConfig {
  int n_groups = 88;
  int max_items = 6;
  double nomination_base = 5.47;      // mean W of non-male members
  double male_nomination_shift = 0.0;
  double score_base = 3.0;            // mean correct items of non-male members
  double score_gender_shift = 0.0;    // in items
  // SD of the W noise on the 0..10 scale. Scores get the same spread
  // rescaled to the item scale (noise_spread * max_items / 10).
  double noise_spread = 2.5;
  Treatment treatment = Treatment::kIdentified;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_groups < 1) throw ValidationError("synth: n_groups must be >= 1");
    if (max_items < 1) throw ValidationError("synth: max_items must be >= 1");
    if (!(noise_spread >= 0.0)) throw ValidationError("synth: noise_spread must be >= 0");
    if (!std::isfinite(nomination_base) || !std::isfinite(male_nomination_shift) || !std::isfinite(score_base) ||
        !std::isfinite(score_gender_shift))
      throw ValidationError("synth: parameters must be finite");
  }

  Json to_json() const {
    return {{"n_groups", n_groups},
            {"max_items", max_items},
            {"nomination_base", nomination_base},
            {"male_nomination_shift", male_nomination_shift},
            {"score_base", score_base},
            {"score_gender_shift", score_gender_shift},
            {"noise_spread", noise_spread},
            {"treatment", to_string(treatment)},
            {"seed", seed}};
  }
};

inline std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

/// Stage responses drawn from the configured effects. Voters prefer
/// candidates with higher W, blurred by the same noise.
class SyntheticResponder final : public StageResponder {
 public:
  SyntheticResponder(const SynthConfig& config, std::uint64_t seed) : config_(config), engine_(seed) {}

  StageValue respond(const SessionView& view, const ParticipantRecord& m, StageId stage) override {
    const bool male = m.gender() == GenderCategory::kMale;
    switch (stage) {
      case StageId::kProfile:
      case StageId::kDiscussion:
        return std::monostate{};
      case StageId::kSelfNomination: {
        const double raw = config_.nomination_base + (male ? config_.male_nomination_shift : 0.0) + noise(1.0);
        const double w = std::clamp(raw, kMinNomination, kMaxNomination);
        if (w != raw) ++clipped_nominations_;
        return w;
      }
      case StageId::kElectionBallot: {
        std::vector<std::pair<double, ParticipantId>> scored;
        for (const auto& c : view.candidates->members)
          scored.emplace_back(*view.group.member(c).nomination + noise(1.0), c);
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<ParticipantId> ranking;
        for (auto& [s, id] : scored) ranking.push_back(id);
        return ranking;
      }
      case StageId::kTask: {
        const double scale = static_cast<double>(config_.max_items) / 10.0;
        const double raw = config_.score_base + (male ? config_.score_gender_shift : 0.0) + noise(scale);
        const int correct = std::clamp(static_cast<int>(std::lround(raw)), 0, config_.max_items);
        return TaskResponse{std::nullopt, TaskScore{m.id, correct, config_.max_items}};
      }
    }
    return std::monostate{};
  }

  int clipped_nominations() const { return clipped_nominations_; }

 private:
  double noise(double scale) {
    if (config_.noise_spread == 0.0) return 0.0;
    return boost::random::normal_distribution<double>(0.0, config_.noise_spread * scale)(engine_);
  }

  const SynthConfig& config_;
  Engine engine_;
  int clipped_nominations_ = 0;
};

/// Fresh participants, half "he/him" and half split between "she/her" and
/// "they/them", with placeholder identities and surveys.
inline std::vector<ParticipantRecord> synthetic_participants(int count, std::uint64_t seed) {
  Engine engine(seed);
  std::vector<ParticipantRecord> out;
  for (int i = 0; i < count; ++i) {
    const std::string n = zero_pad(i + 1, 5);
    ParticipantRecord p;
    p.id = ParticipantId("s" + n);
    p.profile.display_name = "Participant " + n;
    p.profile.avatar = "avatar_" + std::to_string(uniform_index(engine, 24));
    p.profile.pronouns = i % 2 == 0 ? "he/him" : (i % 4 == 1 ? "she/her" : "they/them");
    p.survey.survival_experience = "none";
    p.survey.leadership_experience = "none";
    p.survey.risk_willingness = static_cast<int>(uniform_index(engine, 11));
    p.survey.gender_task_belief = 1 + static_cast<int>(uniform_index(engine, 10));
    p.survey.gender_leader_belief = 1 + static_cast<int>(uniform_index(engine, 10));
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<TranscriptMessage> placeholder_transcript(const GroupRecord& g) {
  std::vector<TranscriptMessage> t;
  for (std::size_t i = 0; i < g.members.size(); ++i)
    t.push_back({g.members[i].visible_name(g.treatment), static_cast<int>(i),
                 std::string(kSyntheticTranscriptMarker) + " message " + std::to_string(i + 1)});
  return t;
}

/// Completed synthetic cohort. The header records the config and how many
/// nominations were clipped into [0, 10].
inline Cohort generate_cohort(const SynthConfig& config) {
  config.validate();
  const auto groups = stratify_groups(synthetic_participants(config.n_groups * 4, derive_seed(config.seed, "people")),
                                      derive_seed(config.seed, "stratify"));
  Cohort cohort;
  int clipped = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    GroupRecord g;
    g.group_id = "g" + zero_pad(static_cast<int>(i) + 1, 5);
    g.treatment = config.treatment;
    g.origin = Origin::kSynthetic;
    g.members = groups[i];
    if (uses_pseudonyms(g.treatment)) {
      const auto alias_seed = derive_seed(config.seed, "alias:" + g.group_id);
      g = assign_pseudonyms(std::move(g), default_pseudonym_roster(), alias_seed);
    }
    g.transcript = placeholder_transcript(g);
    SyntheticResponder responder(config, derive_seed(config.seed, "responses:" + g.group_id));
    cohort.groups.push_back(run_session(g, responder, derive_seed(config.seed, g.group_id)));
    clipped += responder.clipped_nominations();
  }
  cohort.header_extra["synthetic"] = {{"config", config.to_json()}, {"clipped_nominations", clipped}};
  return cohort;
}

/// Uniformly random W and ballots; task scores replay the stored ones.
class UniformRandomResponder final : public StageResponder {
 public:
  explicit UniformRandomResponder(std::uint64_t seed) : engine_(seed) {}

  StageValue respond(const SessionView& view, const ParticipantRecord& m, StageId stage) override {
    switch (stage) {
      case StageId::kSelfNomination:
        return boost::random::uniform_real_distribution<double>(kMinNomination, kMaxNomination)(engine_);
      case StageId::kElectionBallot: {
        auto ranking = view.candidates->members;
        seeded_shuffle(ranking, engine_);
        return ranking;
      }
      case StageId::kTask:
        if (!m.score) throw ValidationError("random elector: '" + m.id.str() + "' has no stored score");
        return TaskResponse{std::nullopt, *m.score};
      default:
        return std::monostate{};
    }
  }

 private:
  Engine engine_;
};

/// Matched cohort in which every group elects a leader uniformly at random.
inline Cohort random_elector_cohort(const Cohort& source, std::uint64_t seed) {
  Cohort out;
  out.schema_version = source.schema_version;
  for (const auto& g : source.groups) {
    GroupRecord a = g;
    a.origin = Origin::kAgent;
    a.model = "uniform-random";
    UniformRandomResponder responder(derive_seed(seed, "random:" + g.group_id));
    out.groups.push_back(run_session(a, responder, derive_seed(seed, g.group_id)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

/// Strict Condorcet winner by brute-force pairwise counting, else every
/// Borda-maximal candidate. No further tie-breaking.
inline std::set<ParticipantId> election_oracle(const std::vector<Ballot>& ballots,
                                               const std::vector<ParticipantId>& candidates) {
  const std::size_t c = candidates.size();
  if (c < 2) throw ValidationError("oracle: need at least two candidates");
  auto position = [&](const Ballot& b, const ParticipantId& x) -> std::size_t {
    if (b.ranking.size() != c) throw ValidationError("oracle: ballot of '" + b.voter.str() + "' is not a full ranking");
    for (std::size_t i = 0; i < c; ++i)
      if (b.ranking[i] == x) return i;
    throw ValidationError("oracle: ballot of '" + b.voter.str() + "' omits '" + x.str() + "'");
  };
  for (const auto& b : ballots) {
    std::set<ParticipantId> distinct(b.ranking.begin(), b.ranking.end());
    if (distinct.size() != c) throw ValidationError("oracle: ballot of '" + b.voter.str() + "' repeats a candidate");
    for (const auto& x : candidates) position(b, x);
  }

  for (const auto& x : candidates) {
    bool beats_all = true;
    for (const auto& y : candidates) {
      if (x == y) continue;
      int x_over_y = 0, y_over_x = 0;
      for (const auto& b : ballots) (position(b, x) < position(b, y) ? x_over_y : y_over_x)++;
      if (x_over_y <= y_over_x) beats_all = false;
    }
    if (beats_all) return {x};
  }

  std::map<ParticipantId, std::size_t> points;
  for (const auto& x : candidates)
    for (const auto& b : ballots) points[x] += c - 1 - position(b, x);
  std::size_t best = 0;
  for (const auto& [x, p] : points) best = std::max(best, p);
  std::set<ParticipantId> winners;
  for (const auto& [x, p] : points)
    if (p == best) winners.insert(x);
  return winners;
}

/// Binomial p-value by direct mass summation in extended precision, with the
/// pmf built by the ratio recurrence from P(0).
inline long double exact_binomial_oracle(int k, int n, long double p0, stats::Alternative alternative) {
  if (n < 0 || n > 10000 || k < 0 || k > n) throw ValidationError("oracle: need 0 <= k <= n <= 10000");
  if (!(p0 > 0.0L && p0 < 1.0L)) throw ValidationError("oracle: p0 must lie in (0, 1)");
  std::vector<long double> pmf(static_cast<std::size_t>(n) + 1);
  const long double odds = p0 / (1.0L - p0);
  pmf[0] = std::pow(1.0L - p0, static_cast<long double>(n));
  for (int i = 0; i < n; ++i) pmf[i + 1] = pmf[i] * static_cast<long double>(n - i) / static_cast<long double>(i + 1) * odds;

  long double p = 0.0L;
  switch (alternative) {
    case stats::Alternative::kLess:
      for (int i = 0; i <= k; ++i) p += pmf[i];
      break;
    case stats::Alternative::kGreater:
      for (int i = n; i >= k; --i) p += pmf[i];
      break;
    case stats::Alternative::kTwoSided: {
      const long double cutoff = pmf[k] * (1.0L + 1e-7L);
      for (int i = 0; i <= n; ++i)
        if (pmf[i] <= cutoff) p += pmf[i];
      break;
    }
  }
  return std::min(1.0L, p);
}

}  // namespace lostatsea::synth
