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

// Strict parsing of model replies. The payload is whatever follows the last
// "ANSWER:" marker, or the whole reply when there is none. Nothing is clamped
// or guessed: a bad reply raises ReplyParseError and the caller re-asks.

#include <charconv>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "lostatsea/session.hpp"

namespace lostatsea {

enum class ReplyProblem { kEmpty, kUnparseable, kOutOfRange, kIncompleteRanking, kUnknownItem };

inline std::string_view to_string(ReplyProblem p) noexcept {
  switch (p) {
    case ReplyProblem::kEmpty: return "empty";
    case ReplyProblem::kUnparseable: return "unparseable";
    case ReplyProblem::kOutOfRange: return "out_of_range";
    case ReplyProblem::kIncompleteRanking: return "incomplete_ranking";
    case ReplyProblem::kUnknownItem: return "unknown_item";
  }
  return "?";
}

class ReplyParseError : public ValidationError {
 public:
  ReplyParseError(ReplyProblem problem, const std::string& msg) : ValidationError(msg), problem_(problem) {}
  ReplyProblem problem() const noexcept { return problem_; }

 private:
  ReplyProblem problem_;
};

struct ParseContext {
  // Visible candidate names for ELECTION_BALLOT, in any order.
  std::vector<std::pair<std::string, ParticipantId>> candidates;
  const TaskKey* key = nullptr;  // for TASK
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n*`_");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n*`_.");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view answer_payload(std::string_view raw) {
  const std::string low = lower(raw);
  const auto pos = low.rfind("answer:");
  if (pos == std::string::npos) return raw;
  return raw.substr(pos + 7);
}

inline double parse_nomination(std::string_view payload) {
  auto text = trim(payload);
  if (const auto slash = text.find("/10"); slash != std::string_view::npos && trim(text.substr(slash + 3)).empty())
    text = trim(text.substr(0, slash));
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw ReplyParseError(ReplyProblem::kUnparseable, "expected a single number, got '" + std::string(text) + "'");
  if (!std::isfinite(value) || value < kMinNomination || value > kMaxNomination)
    throw ReplyParseError(ReplyProblem::kOutOfRange,
                          "self-nomination " + std::string(text) + " is outside [0, 10]");
  return value;
}

inline std::vector<ParticipantId> parse_ranking(std::string_view payload, const ParseContext& ctx) {
  if (ctx.candidates.empty()) throw ValidationError("ballot parsing needs the candidate names");
  static const std::regex kSeparator(R"((?:^|\s)\d+\s*[.):]\s*|[,;>\n|])");
  const std::string text(payload);
  std::vector<std::string> tokens;
  std::sregex_token_iterator it(text.begin(), text.end(), kSeparator, -1), end;
  for (; it != end; ++it) {
    std::string_view tok = trim(std::string_view(it->first, it->second));
    const std::string low = lower(tok);
    if (low.size() > 5 && low.ends_with("(you)")) tok = trim(tok.substr(0, tok.size() - 5));
    if (!tok.empty()) tokens.emplace_back(tok);
  }
  std::vector<ParticipantId> ranking;
  for (const auto& tok : tokens) {
    const auto low = lower(tok);
    auto match = std::find_if(ctx.candidates.begin(), ctx.candidates.end(),
                              [&](const auto& c) { return lower(c.first) == low; });
    if (match == ctx.candidates.end())
      throw ReplyParseError(ReplyProblem::kUnparseable, "'" + tok + "' is not a candidate");
    if (std::find(ranking.begin(), ranking.end(), match->second) != ranking.end())
      throw ReplyParseError(ReplyProblem::kIncompleteRanking, "candidate '" + tok + "' ranked twice");
    ranking.push_back(match->second);
  }
  if (ranking.size() != ctx.candidates.size())
    throw ReplyParseError(ReplyProblem::kIncompleteRanking, "ranked " + std::to_string(ranking.size()) + " of " +
                                                                std::to_string(ctx.candidates.size()) + " candidates");
  return ranking;
}

inline AnswerMap parse_answers(std::string_view payload, const ParseContext& ctx) {
  if (!ctx.key) throw ValidationError("task parsing needs the task key");
  static const std::regex kLine(R"(^\s*[-*]?\s*([A-Za-z0-9_\-]+)\s*[:=]\s*(.*?)\s*$)");
  AnswerMap answers;
  std::string text(payload);
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    if (trim(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, kLine))
      throw ReplyParseError(ReplyProblem::kUnparseable, "cannot read answer line '" + line + "'");
    const std::string qid = m[1].str();
    const std::string answer(trim(m[2].str()));
    const auto* item = ctx.key->find(qid);
    if (!item) throw ReplyParseError(ReplyProblem::kUnknownItem, "unknown question '" + qid + "'");
    if (answers.contains(qid)) throw ReplyParseError(ReplyProblem::kUnparseable, "question '" + qid + "' answered twice");
    if (!item->options.empty()) {
      auto opt = std::find_if(item->options.begin(), item->options.end(),
                              [&](const std::string& o) { return lower(o) == lower(answer); });
      if (opt == item->options.end())
        throw ReplyParseError(ReplyProblem::kOutOfRange, "'" + answer + "' is not an option of '" + qid + "'");
      answers[qid] = *opt;
    } else {
      answers[qid] = answer;
    }
  }
  if (answers.empty()) throw ReplyParseError(ReplyProblem::kUnparseable, "no answers found");
  return answers;
}

}  // namespace detail

/// Parsed value of a stage reply: the trimmed text for PROFILE and
/// DISCUSSION, W for SELF_NOMINATION, a full ranking for ELECTION_BALLOT and
/// answers per question id for TASK.
inline StageValue parse_stage_response(StageId stage, std::string_view raw, const ParseContext& ctx = {}) {
  if (detail::trim(raw).empty()) throw ReplyParseError(ReplyProblem::kEmpty, "empty reply");
  switch (stage) {
    case StageId::kProfile:
    case StageId::kDiscussion:
      return std::string(detail::trim(raw));
    case StageId::kSelfNomination:
      return detail::parse_nomination(detail::answer_payload(raw));
    case StageId::kElectionBallot:
      return detail::parse_ranking(detail::answer_payload(raw), ctx);
    case StageId::kTask:
      return TaskResponse{detail::parse_answers(detail::answer_payload(raw), ctx), std::nullopt};
  }
  throw ValidationError("unknown stage");
}

}  // namespace lostatsea
