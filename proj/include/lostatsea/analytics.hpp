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

// Cohort-level measurements: leader alignment between matched cohorts, gap
// decomposition means, gender composition at each stage, self-nomination and
// score gaps, covariate balance, and a deterministic CSV report writer.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lostatsea/records.hpp"
#include "lostatsea/stats.hpp"

namespace lostatsea {

inline constexpr double kRandomAlignmentBaseline = 0.25;
// Under the 2/2 composition a uniformly random leader shares the human
// leader's gender with probability 2/4.
inline constexpr double kRandomGenderBaseline = 0.5;

/// Short condition code: HI/HP for humans, LI/LP/ND for agents, SI/SP/SND
/// for synthetic cohorts.
inline std::string condition_label(Origin origin, Treatment treatment) {
  if (treatment == Treatment::kNoDemographics) return origin == Origin::kSynthetic ? "SND" : "ND";
  const char suffix = treatment == Treatment::kIdentified ? 'I' : 'P';
  const char prefix = origin == Origin::kHuman ? 'H' : origin == Origin::kAgent ? 'L' : 'S';
  return std::string{prefix, suffix};
}

inline std::string condition_label(const GroupRecord& g) { return condition_label(g.origin, g.treatment); }

namespace detail {

inline void require_complete(const Cohort& cohort, std::string_view what) {
  for (const auto& g : cohort.groups)
    if (!g.complete()) throw ValidationError(std::string(what) + ": group '" + g.group_id + "' is incomplete");
}

/// Welch test that tolerates constant samples: equal constants give t = 0
/// and p = 1, distinct constants give p = 0. Needs two values per sample.
inline std::optional<stats::TestResult> welch_or_degenerate(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  const auto sa = stats::summarize(a), sb = stats::summarize(b);
  if (sa.variance == 0.0 && sb.variance == 0.0) {
    stats::TestResult r;
    r.method = stats::TestMethod::kWelchT;
    const double diff = sa.mean - sb.mean;
    r.statistic = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  return stats::welch_t_test(a, b);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Alignment

struct AlignmentCounts {
  int n_groups = 0;
  int exact_matches = 0;
  int gender_matches = 0;
  std::optional<stats::TestResult> exact_test;   // vs kRandomAlignmentBaseline
  std::optional<stats::TestResult> gender_test;  // vs kRandomGenderBaseline

  double exact_rate() const { return n_groups ? static_cast<double>(exact_matches) / n_groups : NAN; }
  double gender_rate() const { return n_groups ? static_cast<double>(gender_matches) / n_groups : NAN; }
};

struct AlignmentReport {
  AlignmentCounts overall;
  std::map<GenderCategory, AlignmentCounts> by_human_leader_gender;
  std::vector<std::string> unsimulated_groups;  // human groups without a simulated match
  double baseline = kRandomAlignmentBaseline;
};

inline void finish_counts(AlignmentCounts& c, double baseline) {
  if (c.n_groups == 0) return;
  c.exact_test = stats::binomial_test_exact(c.exact_matches, c.n_groups, baseline);
  c.gender_test = stats::binomial_test_exact(c.gender_matches, c.n_groups, kRandomGenderBaseline);
}

/// Compare elected leaders of matched groups. Every simulated group must
/// have a human counterpart with the same id; human groups that were not
/// simulated are listed and skipped.
inline AlignmentReport alignment_report(const Cohort& human, const Cohort& simulated,
                                        double baseline = kRandomAlignmentBaseline) {
  detail::require_complete(human, "alignment");
  detail::require_complete(simulated, "alignment");
  std::map<std::string, const GroupRecord*> by_id;
  for (const auto& g : human.groups) by_id[g.group_id] = &g;

  AlignmentReport r;
  r.baseline = baseline;
  std::set<std::string> seen;
  for (const auto& sim : simulated.groups) {
    auto it = by_id.find(sim.group_id);
    if (it == by_id.end()) throw ValidationError("alignment: simulated group '" + sim.group_id + "' has no human match");
    const GroupRecord& hum = *it->second;
    const auto& h_leader = hum.election->elected;
    const auto& s_leader = sim.election->elected;
    for (const auto& m : hum.members)
      if (std::none_of(sim.members.begin(), sim.members.end(), [&](const auto& x) { return x.id == m.id; }))
        throw ValidationError("alignment: group '" + sim.group_id + "' members differ between cohorts");
    const GenderCategory h_gender = hum.member(h_leader).gender();
    const bool exact = h_leader == s_leader;
    const bool gender = h_gender == sim.member(s_leader).gender();
    for (AlignmentCounts* c : {&r.overall, &r.by_human_leader_gender[h_gender]}) {
      ++c->n_groups;
      c->exact_matches += exact;
      c->gender_matches += gender;
    }
    seen.insert(sim.group_id);
  }
  for (const auto& g : human.groups)
    if (!seen.contains(g.group_id)) r.unsimulated_groups.push_back(g.group_id);
  finish_counts(r.overall, baseline);
  for (auto& [g, c] : r.by_human_leader_gender) finish_counts(c, baseline);
  return r;
}

// ---------------------------------------------------------------------------
// Gap decomposition

struct GapComponentTests {
  std::optional<stats::TestResult> self, peer, total;
};

struct GapRow {
  std::string condition;
  int n_groups = 0;
  stats::SampleSummary self, peer, total;  // normalized per-group gaps
  std::optional<GapComponentTests> vs_reference;
};

struct GapSamples {
  std::vector<double> self, peer, total;
};

inline std::map<std::string, GapSamples> gap_samples(const Cohort& cohort) {
  std::map<std::string, GapSamples> out;
  for (const auto& g : cohort.groups) {
    auto& s = out[condition_label(g)];
    s.self.push_back(g.gap->normalized_self());
    s.peer.push_back(g.gap->normalized_peer());
    s.total.push_back(g.gap->normalized_total());
  }
  return out;
}

/// Mean normalized gaps per condition. With a reference cohort, each
/// component is Welch-tested against the pooled reference groups.
inline std::vector<GapRow> gap_table(const Cohort& cohort, const Cohort* reference = nullptr) {
  detail::require_complete(cohort, "gap table");
  GapSamples ref;
  if (reference) {
    detail::require_complete(*reference, "gap table reference");
    for (auto& [c, s] : gap_samples(*reference)) {
      ref.self.insert(ref.self.end(), s.self.begin(), s.self.end());
      ref.peer.insert(ref.peer.end(), s.peer.begin(), s.peer.end());
      ref.total.insert(ref.total.end(), s.total.begin(), s.total.end());
    }
  }
  std::vector<GapRow> rows;
  for (const auto& [condition, s] : gap_samples(cohort)) {
    GapRow row{condition, static_cast<int>(s.total.size()), stats::summarize(s.self), stats::summarize(s.peer),
               stats::summarize(s.total), std::nullopt};
    if (reference)
      row.vs_reference = GapComponentTests{detail::welch_or_degenerate(s.self, ref.self),
                                           detail::welch_or_degenerate(s.peer, ref.peer),
                                           detail::welch_or_degenerate(s.total, ref.total)};
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Gender composition per stage

enum class StageSet { kOptimal, kCandidates, kElected };

inline std::string_view to_string(StageSet s) noexcept {
  switch (s) {
    case StageSet::kOptimal: return "optimal";
    case StageSet::kCandidates: return "candidates";
    case StageSet::kElected: return "elected";
  }
  return "?";
}

struct CompositionCounts {
  int male_only = 0;
  int non_male_only = 0;
  int mixed = 0;

  int total() const { return male_only + non_male_only + mixed; }
  double mixed_fraction() const { return total() ? static_cast<double>(mixed) / total() : NAN; }
  /// male_only / (male_only + non_male_only).
  double male_fraction() const {
    const int single = male_only + non_male_only;
    return single ? static_cast<double>(male_only) / single : NAN;
  }
};

struct StageRatioRow {
  std::string condition;
  StageSet set = StageSet::kOptimal;
  CompositionCounts counts;
};

inline void count_composition(CompositionCounts& c, const GroupRecord& g, const std::vector<ParticipantId>& ids) {
  bool male = false, non_male = false;
  for (const auto& id : ids) (g.member(id).gender() == GenderCategory::kMale ? male : non_male) = true;
  if (male && non_male) ++c.mixed;
  else if (male) ++c.male_only;
  else ++c.non_male_only;
}

/// Gender make-up of the optimal set, the candidate set and the elected
/// leader, with raw counts per condition.
inline std::vector<StageRatioRow> stage_ratio_table(const Cohort& cohort) {
  detail::require_complete(cohort, "stage ratios");
  std::map<std::string, std::array<CompositionCounts, 3>> acc;
  for (const auto& g : cohort.groups) {
    auto& a = acc[condition_label(g)];
    count_composition(a[0], g, g.gap->optimal_set);
    count_composition(a[1], g, g.election->candidates.members);
    count_composition(a[2], g, {g.election->elected});
  }
  std::vector<StageRatioRow> rows;
  for (const auto& [condition, a] : acc)
    for (int i = 0; i < 3; ++i) rows.push_back({condition, static_cast<StageSet>(i), a[i]});
  return rows;
}

// ---------------------------------------------------------------------------
// Gender gaps in W and in task scores

struct GenderGapRow {
  std::string condition;
  stats::SampleSummary male, non_male;
  std::optional<stats::TestResult> test;  // Welch, male vs non-male

  double gap() const { return male.mean - non_male.mean; }
};

inline std::vector<GenderGapRow> gender_gap_table(const Cohort& cohort,
                                                  const std::function<double(const ParticipantRecord&)>& value) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> acc;
  for (const auto& g : cohort.groups) {
    auto& a = acc[condition_label(g)];
    for (const auto& m : g.members) (m.gender() == GenderCategory::kMale ? a.first : a.second).push_back(value(m));
  }
  std::vector<GenderGapRow> rows;
  for (const auto& [condition, a] : acc)
    rows.push_back({condition, stats::summarize(a.first), stats::summarize(a.second),
                    detail::welch_or_degenerate(a.first, a.second)});
  return rows;
}

inline std::vector<GenderGapRow> nomination_table(const Cohort& cohort) {
  detail::require_complete(cohort, "nomination table");
  return gender_gap_table(cohort, [](const ParticipantRecord& m) { return *m.nomination; });
}

/// Task scores in correct-item counts.
inline std::vector<GenderGapRow> score_table(const Cohort& cohort) {
  detail::require_complete(cohort, "score table");
  return gender_gap_table(cohort, [](const ParticipantRecord& m) { return static_cast<double>(m.score->correct); });
}

// ---------------------------------------------------------------------------
// Covariate balance

/// Chi-square homogeneity test of a categorical participant attribute across
/// two cohorts; categories empty in both are dropped.
inline stats::TestResult covariate_balance(const Cohort& a, const Cohort& b,
                                           const std::function<std::string(const ParticipantRecord&)>& category,
                                           bool yates = false) {
  std::map<std::string, std::array<double, 2>> counts;
  int side = 0;
  for (const Cohort* c : {&a, &b}) {
    for (const auto& g : c->groups)
      for (const auto& m : g.members) counts[category(m)][side] += 1.0;
    ++side;
  }
  std::vector<std::vector<double>> table(2);
  for (const auto& [cat, n] : counts) {
    table[0].push_back(n[0]);
    table[1].push_back(n[1]);
  }
  return stats::chi_square_test(table, yates);
}

inline std::string pronoun_category(const ParticipantRecord& m) { return normalize_pronouns(m.profile.pronouns); }

// ---------------------------------------------------------------------------
// Report output

namespace csv {

inline std::string field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string number(const std::optional<double>& v) { return v ? number(*v) : ""; }

inline std::string row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += field(c);
  }
  return out + "\r\n";
}

inline std::string p_value(const std::optional<stats::TestResult>& t) { return t ? number(t->p_value) : ""; }
inline std::string statistic(const std::optional<stats::TestResult>& t) { return t ? number(t->statistic) : ""; }

}  // namespace csv

struct CohortTables {
  std::vector<GapRow> gap;
  std::vector<GenderGapRow> nomination;
  std::vector<GenderGapRow> score;
  std::vector<StageRatioRow> stage_ratio;
  std::optional<AlignmentReport> alignment;
  std::optional<stats::TestResult> pronoun_balance;
};

inline std::string gap_csv(const std::vector<GapRow>& rows) {
  std::string s = csv::row({"condition", "n_groups", "delta_self", "delta_peer", "delta_total", "sd_self", "sd_peer",
                            "sd_total", "p_self_vs_ref", "p_peer_vs_ref", "p_total_vs_ref"});
  for (const auto& r : rows) {
    const auto t = r.vs_reference.value_or(GapComponentTests{});
    s += csv::row({r.condition, std::to_string(r.n_groups), csv::number(r.self.mean), csv::number(r.peer.mean),
                   csv::number(r.total.mean), csv::number(r.self.sd()), csv::number(r.peer.sd()),
                   csv::number(r.total.sd()), csv::p_value(t.self), csv::p_value(t.peer), csv::p_value(t.total)});
  }
  return s;
}

inline std::string gender_gap_csv(const std::vector<GenderGapRow>& rows) {
  std::string s = csv::row({"condition", "n_male", "mean_male", "sd_male", "n_non_male", "mean_non_male",
                            "sd_non_male", "gap", "t", "df", "p"});
  for (const auto& r : rows)
    s += csv::row({r.condition, std::to_string(r.male.n), csv::number(r.male.mean), csv::number(r.male.sd()),
                   std::to_string(r.non_male.n), csv::number(r.non_male.mean), csv::number(r.non_male.sd()),
                   csv::number(r.gap()), csv::statistic(r.test),
                   r.test ? csv::number(r.test->degrees_of_freedom) : "", csv::p_value(r.test)});
  return s;
}

inline std::string stage_ratio_csv(const std::vector<StageRatioRow>& rows) {
  std::string s = csv::row({"condition", "stage", "male_only", "non_male_only", "mixed", "n_groups",
                            "mixed_fraction", "male_fraction"});
  for (const auto& r : rows)
    s += csv::row({r.condition, std::string(to_string(r.set)), std::to_string(r.counts.male_only),
                   std::to_string(r.counts.non_male_only), std::to_string(r.counts.mixed),
                   std::to_string(r.counts.total()), csv::number(r.counts.mixed_fraction()),
                   csv::number(r.counts.male_fraction())});
  return s;
}

inline std::string alignment_csv(const AlignmentReport& a) {
  std::string s = csv::row({"stratum", "n_groups", "exact_matches", "gender_matches", "exact_rate", "gender_rate",
                            "baseline", "p_exact", "p_gender"});
  auto add = [&](const std::string& name, const AlignmentCounts& c) {
    s += csv::row({name, std::to_string(c.n_groups), std::to_string(c.exact_matches), std::to_string(c.gender_matches),
                   csv::number(c.exact_rate()), csv::number(c.gender_rate()), csv::number(a.baseline),
                   csv::p_value(c.exact_test), csv::p_value(c.gender_test)});
  };
  add("all", a.overall);
  for (const auto& [g, c] : a.by_human_leader_gender) add("human_leader_" + std::string(to_string(g)), c);
  return s;
}

inline std::string balance_csv(const stats::TestResult& t) {
  return csv::row({"covariate", "statistic", "df", "p"}) +
         csv::row({"pronouns", csv::number(t.statistic), csv::number(t.degrees_of_freedom), csv::number(t.p_value)});
}

/// Write one CSV per table plus manifest.json into `dir`. Returns the file
/// names written, in order.
inline std::vector<std::string> emit_report(const std::filesystem::path& dir, const CohortTables& tables,
                                            const Json& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SystemError("cannot create report directory '" + dir.string() + "': " + ec.message());

  std::vector<std::pair<std::string, std::string>> files = {
      {"gap.csv", gap_csv(tables.gap)},
      {"nomination.csv", gender_gap_csv(tables.nomination)},
      {"score.csv", gender_gap_csv(tables.score)},
      {"stage_ratio.csv", stage_ratio_csv(tables.stage_ratio)},
  };
  if (tables.alignment) files.emplace_back("alignment.csv", alignment_csv(*tables.alignment));
  if (tables.pronoun_balance) files.emplace_back("balance.csv", balance_csv(*tables.pronoun_balance));

  Json m = manifest;
  m["files"] = Json::array();
  for (const auto& f : files) m["files"].push_back(f.first);
  files.emplace_back("manifest.json", m.dump(2) + "\n");

  std::vector<std::string> names;
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw SystemError("cannot write '" + (dir / name).string() + "'");
    out << body;
    if (!out) throw SystemError("write failed for '" + (dir / name).string() + "'");
    names.push_back(name);
  }
  return names;
}

}  // namespace lostatsea
