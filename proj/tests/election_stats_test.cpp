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

// Election rules, gap decomposition and the statistical tests. Reference
// p-values were computed once with scipy.stats and are frozen here.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "lostatsea/election.hpp"
#include "lostatsea/stats.hpp"

namespace lostatsea {
namespace {

using stats::Alternative;

std::vector<SelfNomination> noms(std::initializer_list<std::pair<const char*, double>> w) {
  std::vector<SelfNomination> out;
  for (const auto& [id, s] : w) out.push_back({ParticipantId(id), s});
  return out;
}

std::vector<TaskScore> scores(std::initializer_list<std::pair<const char*, int>> s, int max_items = 10) {
  std::vector<TaskScore> out;
  for (const auto& [id, c] : s) out.push_back({ParticipantId(id), c, max_items});
  return out;
}

Ballot ballot(const char* voter, std::initializer_list<const char*> ranking) {
  Ballot b{ParticipantId(voter), {}};
  for (const char* r : ranking) b.ranking.emplace_back(r);
  return b;
}

CandidateSet cands(std::initializer_list<const char*> ids) {
  CandidateSet c;
  for (const char* id : ids) c.members.emplace_back(id);
  return c;
}

// ---------------------------------------------------------------------------
// select_candidates

TEST(SelectCandidates, StrictOrderTakesTopTwo) {
  const auto c = select_candidates(noms({{"A", 2}, {"B", 9}, {"C", 8}, {"D", 1}}), 0);
  EXPECT_EQ(c.members, make_ids({"B", "C"}));
  EXPECT_EQ(c.trace.resolution, CutoffResolution::kNone);
}

TEST(SelectCandidates, AllTiedDrawIsSeededAndRecorded) {
  const auto w = noms({{"A", 5}, {"B", 5}, {"C", 5}, {"D", 5}});
  const auto first = select_candidates(w, 7);
  const auto again = select_candidates(w, 7);
  EXPECT_EQ(first.size(), 2u);
  EXPECT_NE(first.members[0], first.members[1]);
  EXPECT_EQ(first.members, again.members);
  EXPECT_EQ(first.trace.resolution, CutoffResolution::kSeededDraw);
  EXPECT_EQ(first.trace.tied_at_cutoff.size(), 4u);
}

TEST(SelectCandidates, TieAtCutoffPicksOneOfTheTied) {
  const auto w = noms({{"A", 9}, {"B", 7}, {"C", 7}, {"D", 1}});
  const auto c = select_candidates(w, 1);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.members[0], ParticipantId("A"));
  EXPECT_TRUE(c.members[1] == ParticipantId("B") || c.members[1] == ParticipantId("C"));
  EXPECT_EQ(c.trace.tied_at_cutoff, make_ids({"B", "C"}));
  EXPECT_EQ(select_candidates(w, 1).members, c.members);
}

TEST(SelectCandidates, ExpandPolicyAdmitsEveryTiedMember) {
  const auto c = select_candidates(noms({{"A", 9}, {"B", 7}, {"C", 7}, {"D", 1}}), 1, CutoffTiePolicy::kExpand);
  EXPECT_EQ(c.members, make_ids({"A", "B", "C"}));
  EXPECT_EQ(c.trace.resolution, CutoffResolution::kExpanded);
}

TEST(SelectCandidates, RejectsOutOfRangeOrDuplicateW) {
  EXPECT_THROW(select_candidates(noms({{"A", 12}, {"B", 1}, {"C", 1}, {"D", 1}}), 0), ValidationError);
  EXPECT_THROW(select_candidates(noms({{"A", 1}, {"A", 2}, {"C", 1}, {"D", 1}}), 0), ValidationError);
}

TEST(SelectCandidates, DrawsCoverEveryTiedMemberAcrossSeeds) {
  const auto w = noms({{"A", 9}, {"B", 7}, {"C", 7}, {"D", 1}});
  std::set<ParticipantId> seen;
  for (std::uint64_t s = 0; s < 64; ++s) seen.insert(select_candidates(w, s).members[1]);
  EXPECT_EQ(seen.size(), 2u);
}

// ---------------------------------------------------------------------------
// pairwise_matrix / borda_scores

const std::vector<Ballot> kCycle = {ballot("v1", {"X", "Y", "Z"}), ballot("v2", {"Y", "Z", "X"}),
                                    ballot("v3", {"Z", "X", "Y"}), ballot("v4", {"X", "Y", "Z"})};

TEST(Pairwise, ThreeToOne) {
  const std::vector<Ballot> b = {ballot("1", {"X", "Y"}), ballot("2", {"X", "Y"}), ballot("3", {"X", "Y"}),
                                 ballot("4", {"Y", "X"})};
  const auto m = pairwise_matrix(b, cands({"X", "Y"}));
  EXPECT_EQ(m.at(ParticipantId("X"), ParticipantId("Y")), 3);
  EXPECT_EQ(m.at(ParticipantId("Y"), ParticipantId("X")), 1);
}

TEST(Pairwise, EvenSplit) {
  const std::vector<Ballot> b = {ballot("1", {"X", "Y"}), ballot("2", {"X", "Y"}), ballot("3", {"Y", "X"}),
                                 ballot("4", {"Y", "X"})};
  const auto m = pairwise_matrix(b, cands({"X", "Y"}));
  EXPECT_EQ(m.at(ParticipantId("X"), ParticipantId("Y")), 2);
  EXPECT_EQ(m.at(ParticipantId("Y"), ParticipantId("X")), 2);
}

TEST(Pairwise, CycleProfile) {
  const auto m = pairwise_matrix(kCycle, cands({"X", "Y", "Z"}));
  EXPECT_EQ(m.at(ParticipantId("X"), ParticipantId("Y")), 3);
  EXPECT_EQ(m.at(ParticipantId("Y"), ParticipantId("Z")), 3);
  EXPECT_EQ(m.at(ParticipantId("X"), ParticipantId("Z")), 2);
  EXPECT_EQ(m.at(ParticipantId("Z"), ParticipantId("X")), 2);
}

TEST(Pairwise, RejectsPartialBallot) {
  const std::vector<Ballot> b = {ballot("1", {"X"}), ballot("2", {"X", "Y"}), ballot("3", {"Y", "X"}),
                                 ballot("4", {"Y", "X"})};
  EXPECT_THROW(pairwise_matrix(b, cands({"X", "Y"})), ValidationError);
}

TEST(Borda, CycleProfile) {
  const auto s = borda_scores(kCycle, cands({"X", "Y", "Z"}));
  EXPECT_EQ(s.at(ParticipantId("X")), 5);
  EXPECT_EQ(s.at(ParticipantId("Y")), 4);
  EXPECT_EQ(s.at(ParticipantId("Z")), 3);
}

TEST(Borda, UnanimousAndSplit) {
  const std::vector<Ballot> all = {ballot("1", {"X", "Y"}), ballot("2", {"X", "Y"}), ballot("3", {"X", "Y"}),
                                   ballot("4", {"X", "Y"})};
  auto s = borda_scores(all, cands({"X", "Y"}));
  EXPECT_EQ(s.at(ParticipantId("X")), 4);
  EXPECT_EQ(s.at(ParticipantId("Y")), 0);
  const std::vector<Ballot> split = {ballot("1", {"X", "Y"}), ballot("2", {"X", "Y"}), ballot("3", {"Y", "X"}),
                                     ballot("4", {"Y", "X"})};
  s = borda_scores(split, cands({"X", "Y"}));
  EXPECT_EQ(s.at(ParticipantId("X")), 2);
  EXPECT_EQ(s.at(ParticipantId("Y")), 2);
}

TEST(Borda, PointsSumToVotersTimesTriangle) {
  // Each ballot hands out 0 + 1 + ... + (C-1) points.
  const auto s = borda_scores(kCycle, cands({"X", "Y", "Z"}));
  int total = 0;
  for (const auto& [id, p] : s) total += p;
  EXPECT_EQ(total, 4 * 3);
}

// ---------------------------------------------------------------------------
// resolve_election

TEST(ResolveElection, MajorityWinsByCondorcet) {
  const auto w = noms({{"X", 6}, {"Y", 8}, {"a", 1}, {"b", 1}});
  const std::vector<Ballot> b = {ballot("X", {"X", "Y"}), ballot("Y", {"X", "Y"}), ballot("a", {"X", "Y"}),
                                 ballot("b", {"Y", "X"})};
  const auto e = resolve_election(b, cands({"X", "Y"}), w, 0);
  EXPECT_EQ(e.elected, ParticipantId("X"));
  EXPECT_EQ(e.decided_by(), TieBreakRule::kCondorcet);
}

TEST(ResolveElection, EvenSplitFallsToHighestW) {
  const auto w = noms({{"X", 8}, {"Y", 6}, {"a", 1}, {"b", 1}});
  const std::vector<Ballot> b = {ballot("X", {"X", "Y"}), ballot("Y", {"Y", "X"}), ballot("a", {"X", "Y"}),
                                 ballot("b", {"Y", "X"})};
  const auto e = resolve_election(b, cands({"X", "Y"}), w, 0);
  EXPECT_EQ(e.elected, ParticipantId("X"));
  EXPECT_EQ(e.decided_by(), TieBreakRule::kHighestW);
  EXPECT_EQ(e.tiebreak_trace,
            (std::vector<TieBreakRule>{TieBreakRule::kCondorcet, TieBreakRule::kBorda, TieBreakRule::kHighestW}));
}

TEST(ResolveElection, CycleFallsToBorda) {
  const auto w = noms({{"X", 7}, {"Y", 7}, {"Z", 7}, {"v", 1}});
  std::vector<Ballot> b = kCycle;
  b[0].voter = ParticipantId("X");
  b[1].voter = ParticipantId("Y");
  b[2].voter = ParticipantId("Z");
  b[3].voter = ParticipantId("v");
  const auto e = resolve_election(b, cands({"X", "Y", "Z"}), w, 0);
  EXPECT_EQ(e.elected, ParticipantId("X"));
  EXPECT_EQ(e.decided_by(), TieBreakRule::kBorda);
}

TEST(ResolveElection, FullTieIsSeededDraw) {
  const auto w = noms({{"X", 5}, {"Y", 5}, {"a", 1}, {"b", 1}});
  const std::vector<Ballot> b = {ballot("X", {"X", "Y"}), ballot("Y", {"Y", "X"}), ballot("a", {"X", "Y"}),
                                 ballot("b", {"Y", "X"})};
  std::set<ParticipantId> winners;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto e = resolve_election(b, cands({"X", "Y"}), w, seed);
    EXPECT_EQ(e.decided_by(), TieBreakRule::kSeededDraw);
    EXPECT_EQ(resolve_election(b, cands({"X", "Y"}), w, seed).elected, e.elected);
    winners.insert(e.elected);
  }
  EXPECT_EQ(winners.size(), 2u);
}

TEST(ResolveElection, RejectsWrongBallotCount) {
  const auto w = noms({{"X", 8}, {"Y", 6}, {"a", 1}, {"b", 1}});
  const std::vector<Ballot> b = {ballot("X", {"X", "Y"}), ballot("Y", {"Y", "X"})};
  EXPECT_THROW(resolve_election(b, cands({"X", "Y"}), w, 0), ValidationError);
}

TEST(ResolveElection, OutcomeIsInvariantToBallotOrderWithoutDraws) {
  const auto w = noms({{"X", 7}, {"Y", 7}, {"Z", 7}, {"v", 1}});
  std::vector<Ballot> b = kCycle;
  b[0].voter = ParticipantId("X");
  b[1].voter = ParticipantId("Y");
  b[2].voter = ParticipantId("Z");
  b[3].voter = ParticipantId("v");
  const auto base = resolve_election(b, cands({"X", "Y", "Z"}), w, 0).elected;
  std::sort(b.begin(), b.end(), [](const Ballot& l, const Ballot& r) { return l.voter < r.voter; });
  do {
    EXPECT_EQ(resolve_election(b, cands({"X", "Y", "Z"}), w, 0).elected, base);
  } while (std::next_permutation(b.begin(), b.end(),
                                 [](const Ballot& l, const Ballot& r) { return l.voter < r.voter; }));
}

TEST(ResolveElection, RelabellingCandidatesRelabelsTheWinner) {
  // Swap the names X and Y everywhere (W included): the winner swaps too.
  const auto w = noms({{"X", 8}, {"Y", 6}, {"a", 1}, {"b", 1}});
  const auto w_swapped = noms({{"Y", 8}, {"X", 6}, {"a", 1}, {"b", 1}});
  const std::vector<Ballot> b = {ballot("X", {"X", "Y"}), ballot("Y", {"Y", "X"}), ballot("a", {"X", "Y"}),
                                 ballot("b", {"Y", "X"})};
  const std::vector<Ballot> b_swapped = {ballot("Y", {"Y", "X"}), ballot("X", {"X", "Y"}), ballot("a", {"Y", "X"}),
                                         ballot("b", {"X", "Y"})};
  EXPECT_EQ(resolve_election(b, cands({"X", "Y"}), w, 3).elected, ParticipantId("X"));
  EXPECT_EQ(resolve_election(b_swapped, cands({"Y", "X"}), w_swapped, 3).elected, ParticipantId("Y"));
}

// ---------------------------------------------------------------------------
// optimal_leaders / leader_gap

TEST(OptimalLeaders, Examples) {
  EXPECT_EQ(optimal_leaders(scores({{"A", 10}, {"B", 7}, {"C", 5}, {"D", 3}})), make_ids({"A"}));
  EXPECT_EQ(optimal_leaders(scores({{"A", 6}, {"B", 6}, {"C", 2}, {"D", 1}})), make_ids({"A", "B"}));
  EXPECT_EQ(optimal_leaders(scores({{"A", 4}, {"B", 4}, {"C", 4}, {"D", 4}})), make_ids({"A", "B", "C", "D"}));
}

TEST(LeaderGap, SelfExclusion) {
  const auto g = leader_gap(scores({{"A", 10}, {"B", 7}, {"C", 5}, {"D", 3}}), cands({"B", "C"}), ParticipantId("B"), 10);
  EXPECT_EQ(g.delta_total, 3);
  EXPECT_EQ(g.delta_self, 3);
  EXPECT_EQ(g.delta_peer, 0);
}

TEST(LeaderGap, PeerExclusion) {
  const auto g = leader_gap(scores({{"A", 4}, {"B", 9}, {"C", 2}, {"D", 1}}), cands({"A", "B"}), ParticipantId("A"), 10);
  EXPECT_EQ(g.delta_total, 5);
  EXPECT_EQ(g.delta_self, 0);
  EXPECT_EQ(g.delta_peer, 5);
  EXPECT_DOUBLE_EQ(g.normalized_peer(), 0.5);
}

TEST(LeaderGap, OptimalElectedIsZero) {
  const auto g = leader_gap(scores({{"A", 4}, {"B", 9}, {"C", 2}, {"D", 1}}), cands({"A", "B"}), ParticipantId("B"), 10);
  EXPECT_EQ(g.delta_total, 0);
  EXPECT_EQ(g.delta_self, 0);
  EXPECT_EQ(g.delta_peer, 0);
}

TEST(LeaderGap, ElectedMustBeCandidate) {
  EXPECT_THROW(leader_gap(scores({{"A", 4}, {"B", 9}, {"C", 2}, {"D", 1}}), cands({"A", "B"}), ParticipantId("C"), 10),
               ValidationError);
}

TEST(LeaderGap, IdentityOverEveryScoreVectorAndElection) {
  // Exhaustive over scores 0..3 for four members, every candidate pair and elected.
  const auto ids = make_ids({"A", "B", "C", "D"});
  for (int code = 0; code < 256; ++code) {
    std::vector<TaskScore> s;
    for (int i = 0; i < 4; ++i) s.push_back({ids[static_cast<std::size_t>(i)], (code >> (2 * i)) & 3, 3});
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        CandidateSet c;
        c.members = {ids[i], ids[j]};
        for (const auto& e : c.members) {
          const auto g = leader_gap(s, c, e, 3);
          ASSERT_EQ(g.delta_total, g.delta_self + g.delta_peer);
          ASSERT_EQ(g.delta_self * g.delta_peer, 0);
          ASSERT_GE(g.delta_total, 0);
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Special functions (scipy.special reference values)

TEST(SpecialFunctions, IncompleteBeta) {
  EXPECT_NEAR(stats::incomplete_beta(2.5, 0.5, 0.3), 0.018927124071945658, 1e-12);
  EXPECT_NEAR(stats::incomplete_beta(10, 3, 0.9), 0.889130022255, 1e-10);
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(stats::incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(SpecialFunctions, UpperIncompleteGamma) {
  EXPECT_NEAR(stats::incomplete_gamma_upper(3.5, 2.0), 0.779777408475716, 1e-12);
  EXPECT_NEAR(stats::incomplete_gamma_upper(0.5, 0.1), 0.6547208460185768, 1e-12);
  EXPECT_NEAR(stats::incomplete_gamma_upper(10, 25), 0.0002214766382487835, 1e-15);
}

TEST(SpecialFunctions, StudentT) {
  EXPECT_NEAR(stats::student_t_cdf(-1.5, 4.2), 0.10234039206283557, 1e-12);
  EXPECT_NEAR(stats::student_t_cdf(2.2, 30), 0.9821757800015821, 1e-12);
  EXPECT_DOUBLE_EQ(stats::student_t_cdf(0.0, 7), 0.5);
}

// ---------------------------------------------------------------------------
// Welch

TEST(Welch, SmallSamples) {
  const std::vector<double> a = {1, 2, 3}, b = {2, 4, 6};
  const auto r = stats::welch_t_test(a, b);
  EXPECT_NEAR(r.statistic, -1.5491933384829668, 1e-12);
  EXPECT_NEAR(*r.degrees_of_freedom, 2.9411764705882346, 1e-12);
  EXPECT_NEAR(r.p_value, 0.2208808404940958, 1e-10);
  EXPECT_NEAR(stats::welch_t_test(a, b, Alternative::kGreater).p_value, 0.8895595797529521, 1e-10);
  EXPECT_NEAR(stats::welch_t_test(a, b, Alternative::kLess).p_value, 0.1104404202470479, 1e-10);
}

TEST(Welch, UnequalSizes) {
  const std::vector<double> a = {5.1, 6.3, 7.7, 4.2, 6.6, 8.0, 5.5}, b = {4.0, 3.9, 5.2, 4.8, 3.1};
  const auto r = stats::welch_t_test(a, b);
  EXPECT_NEAR(r.statistic, 3.1408508745384975, 1e-12);
  EXPECT_NEAR(*r.degrees_of_freedom, 9.81607966697683, 1e-10);
  EXPECT_NEAR(r.p_value, 0.010728465394516246, 1e-10);
}

TEST(Welch, IdenticalSamplesGiveZeroAndOne) {
  const std::vector<double> a = {1, 4, 2, 8};
  const auto r = stats::welch_t_test(a, a);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Welch, SwappingSamplesNegatesTAndKeepsP) {
  const std::vector<double> a = {5.1, 6.3, 7.7, 4.2}, b = {4.0, 3.9, 5.2, 4.8, 3.1};
  const auto ab = stats::welch_t_test(a, b), ba = stats::welch_t_test(b, a);
  EXPECT_DOUBLE_EQ(ab.statistic, -ba.statistic);
  EXPECT_NEAR(ab.p_value, ba.p_value, 1e-14);
  EXPECT_NEAR(stats::welch_t_test(a, b, Alternative::kGreater).p_value,
              stats::welch_t_test(b, a, Alternative::kLess).p_value, 1e-14);
}

TEST(Welch, LargeShiftIsHighlySignificant) {
  // Two samples with the reported male/non-male nomination means and a
  // common spread, 176 per arm: the gap must land well below 0.001.
  std::vector<double> male, non_male;
  for (int i = 0; i < 176; ++i) {
    const double z = (i % 11 - 5) * 0.5;
    male.push_back(6.67 + z);
    non_male.push_back(5.47 + z);
  }
  EXPECT_LT(stats::welch_t_test(male, non_male).p_value, 0.001);
}

TEST(Welch, RejectsTinyOrConstantSamples) {
  const std::vector<double> one = {1}, two = {1, 2}, flat = {3, 3};
  EXPECT_THROW(stats::welch_t_test(one, two), ValidationError);
  EXPECT_THROW(stats::welch_t_test(flat, flat), ValidationError);
}

// ---------------------------------------------------------------------------
// Exact binomial

struct BinomCase {
  int k, n;
  double p0;
  Alternative alt;
  double expected;
};

TEST(Binomial, MatchesReferenceValues) {
  const BinomCase cases[] = {
      {57, 88, 0.5, Alternative::kTwoSided, 0.007343408723708127},
      {57, 88, 0.5, Alternative::kGreater, 0.0036717043618540637},
      {44, 88, 0.5, Alternative::kTwoSided, 1.0},
      {41, 88, 0.25, Alternative::kGreater, 9.35971389537822e-06},
      {41, 88, 0.25, Alternative::kTwoSided, 1.132927029477975e-05},
      {0, 4, 0.5, Alternative::kLess, 0.0625},
      {4, 4, 0.5, Alternative::kGreater, 0.0625},
      {54, 99, 0.5, Alternative::kTwoSided, 0.4215233436157706},
      {54, 99, 0.5, Alternative::kGreater, 0.2107616718078853},
      {10, 99, 0.25, Alternative::kTwoSided, 0.00027759216968221734},
      {3, 4, 0.25, Alternative::kTwoSided, 0.05078125},
  };
  for (const auto& c : cases) {
    const double p = stats::binomial_test_exact(c.k, c.n, c.p0, c.alt).p_value;
    EXPECT_NEAR(p, c.expected, 1e-12 + 1e-9 * c.expected)
        << c.k << "/" << c.n << " p0=" << c.p0 << " " << stats::to_string(c.alt);
  }
}

TEST(Binomial, ReportedLeaderShareSignificance) {
  EXPECT_NEAR(stats::binomial_test_exact(57, 88, 0.5, Alternative::kGreater).p_value, 0.0037, 0.0005);
  EXPECT_LT(stats::binomial_test_exact(41, 88, 0.25, Alternative::kGreater).p_value, 0.01);
}

TEST(Binomial, RejectsBadArguments) {
  EXPECT_THROW(stats::binomial_test_exact(5, 4, 0.5), ValidationError);
  EXPECT_THROW(stats::binomial_test_exact(1, 4, 0.0), ValidationError);
  EXPECT_THROW(stats::binomial_test_exact(1, 4, 1.0), ValidationError);
}

// ---------------------------------------------------------------------------
// Chi-square

TEST(ChiSquare, RaceTable) {
  const auto r = stats::chi_square_test({{288, 64}, {297, 99}});
  EXPECT_NEAR(r.statistic, 5.0831524303916895, 1e-10);
  EXPECT_NEAR(r.p_value, 0.024159405063859263, 1e-10);
  EXPECT_EQ(*r.degrees_of_freedom, 1.0);
  const auto y = stats::chi_square_test({{288, 64}, {297, 99}}, true);
  EXPECT_NEAR(y.statistic, 4.690961116063361, 1e-10);
  EXPECT_NEAR(y.p_value, 0.030321682454102713, 1e-10);
  EXPECT_NEAR(r.p_value, 0.03, 0.015);
  EXPECT_NEAR(y.p_value, 0.03, 0.015);
}

TEST(ChiSquare, HomogeneousAndSeparated) {
  const auto h = stats::chi_square_test({{50, 50}, {50, 50}});
  EXPECT_DOUBLE_EQ(h.statistic, 0.0);
  EXPECT_DOUBLE_EQ(h.p_value, 1.0);
  const auto s = stats::chi_square_test({{10, 0}, {0, 10}});
  EXPECT_NEAR(s.statistic, 20.0, 1e-12);
  EXPECT_NEAR(s.p_value, 7.744216431044088e-06, 1e-14);
  EXPECT_LT(s.p_value, 0.001);
}

TEST(ChiSquare, TwoByThree) {
  const auto r = stats::chi_square_test({{10, 20, 30}, {20, 20, 20}});
  EXPECT_NEAR(r.statistic, 5.333333333333334, 1e-10);
  EXPECT_NEAR(r.p_value, 0.0694834512228015, 1e-10);
  EXPECT_EQ(*r.degrees_of_freedom, 2.0);
  // The continuity correction only applies to 2 x 2 tables.
  EXPECT_DOUBLE_EQ(stats::chi_square_test({{10, 20, 30}, {20, 20, 20}}, true).statistic, r.statistic);
}

TEST(ChiSquare, RejectsBadTables) {
  EXPECT_THROW(stats::chi_square_test({{1, 2}}), ValidationError);
  EXPECT_THROW(stats::chi_square_test({{1, 2}, {3}}), ValidationError);
  EXPECT_THROW(stats::chi_square_test({{0, 2}, {0, 3}}), ValidationError);
  EXPECT_THROW(stats::chi_square_test({{-1, 2}, {1, 3}}), ValidationError);
}

}  // namespace
}  // namespace lostatsea
