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

// Stage prompts. Every stage uses the same skeleton: system role, participant
// profile, experiment structure, the agent's own earlier replies, and the
// current stage, closed by a persona-conformity reminder. Output is
// byte-stable for identical inputs.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lostatsea/persona.hpp"
#include "lostatsea/session.hpp"

namespace lostatsea {

/// Accepted reply of an earlier stage.
struct StageRecord {
  StageId stage;
  std::string reply;
};

struct StagePrompt {
  std::string system_block;
  std::string profile_block;  // empty under no_demographics
  std::string structure_block;
  std::string previous_stages_block;
  std::string current_stage_block;

  std::string text() const;
  friend bool operator==(const StagePrompt&, const StagePrompt&) = default;
};

namespace prompt_text {

inline constexpr std::string_view kSystem =
    "# SYSTEM ROLE INSTRUCTION: LLM PARTICIPANT SIMULATION\n"
    "\n"
    "You are simulating a human crowd-worker participant in a multi-stage online experiment, which involves "
    "working with a group of 3 other participants to elect the most competent leader to complete a task. Your "
    "goal is to behave **realistically and consistently**, as if you were the person defined in the following "
    "YOUR PARTICIPANT PROFILE section.";

inline constexpr std::string_view kProfileHeader = "# YOUR PARTICIPANT PROFILE";

inline constexpr std::string_view kProfileReminder =
    "**Reminder**: This profile defines your identity. All reasoning, language, and judgments should be "
    "consistent with this perspective. You are not a neutral observer\xE2\x80\x94you are this person.";

inline constexpr std::string_view kStructure =
    "# EXPERIMENT STRUCTURE\n"
    "\n"
    "You are currently in an experiment that proceeds in multiple sequential stages. At each stage, you may make "
    "individual judgements, or reflect on interactions with simulated group members.\n"
    "\n"
    "*   You will receive current instructions in the **CURRENT STAGE** section.\n"
    "*   You may need to consider information or responses from previous stages (if any) to respond "
    "appropriately to the current stage.";

inline constexpr std::string_view kPreviousHeader = "# PREVIOUS STAGES";
inline constexpr std::string_view kCurrentHeader = "# CURRENT STAGE";
inline constexpr std::string_view kNoPreviousStages = "(none)";

inline constexpr std::string_view kClosing =
    "**Important:** You must respond as the person described in the YOUR PARTICIPANT PROFILE section. Your "
    "thoughts, reasoning and choices should reflect this identity's likely beliefs, priorities, and lived "
    "experience. Do not use general world knowledge or reasoning that your persona would not likely know. You "
    "are not a neutral observer \xE2\x80\x94 you are this person.";

inline constexpr std::string_view kDivider = "___";

inline std::string_view stage_title(StageId s) {
  switch (s) {
    case StageId::kProfile: return "Profile";
    case StageId::kDiscussion: return "Group discussion";
    case StageId::kSelfNomination: return "Self-nomination";
    case StageId::kElectionBallot: return "Leader election";
    case StageId::kTask: return "Survival task";
  }
  return "?";
}

}  // namespace prompt_text

inline std::string StagePrompt::text() const {
  using namespace prompt_text;
  std::string s;
  s.reserve(4096);
  s += system_block;
  s += "\n\n";
  s += kDivider;
  s += "\n\n";
  s += kProfileHeader;
  s += "\n\n";
  s += profile_block;
  s += "\n\n";
  s += kProfileReminder;
  s += "\n\n";
  s += kDivider;
  s += "\n\n";
  s += structure_block;
  s += "\n\n";
  s += kDivider;
  s += "\n";
  s += kPreviousHeader;
  s += "\n\n";
  s += previous_stages_block;
  s += "\n\n";
  s += kDivider;
  s += "\n";
  s += kCurrentHeader;
  s += "\n\n";
  s += current_stage_block;
  s += "\n\n";
  s += kClosing;
  s += "\n";
  return s;
}

inline std::string stage_metadata(StageId stage) {
  return "## Stage " + std::to_string(stage_index(stage) + 1) + " of " + std::to_string(kStageOrder.size()) + ": " +
         std::string(prompt_text::stage_title(stage)) + "\nStage id: " + std::string(to_string(stage));
}

/// Render the prompt for `stage`. `history` must hold exactly the agent's
/// accepted replies for every earlier stage, in order.
inline StagePrompt render_stage_prompt(const PersonaContext& persona, std::span<const StageRecord> history,
                                       StageId stage, std::string_view stage_materials) {
  const std::size_t index = stage_index(stage);
  if (history.size() != index)
    throw ValidationError("prompt for " + std::string(to_string(stage)) + " needs " + std::to_string(index) +
                          " earlier stages, history has " + std::to_string(history.size()));
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].stage != kStageOrder[i])
      throw ValidationError("history is missing stage " + std::string(to_string(kStageOrder[i])));

  StagePrompt p;
  p.system_block = prompt_text::kSystem;
  p.profile_block = render_profile_block(persona);
  p.structure_block = prompt_text::kStructure;
  if (history.empty()) {
    p.previous_stages_block = prompt_text::kNoPreviousStages;
  } else {
    for (const auto& h : history) {
      if (!p.previous_stages_block.empty()) p.previous_stages_block += "\n\n";
      p.previous_stages_block += "## Stage " + std::to_string(stage_index(h.stage) + 1) + ": " +
                                 std::string(prompt_text::stage_title(h.stage)) + "\nYour response:\n" + h.reply;
    }
  }
  p.current_stage_block = stage_metadata(stage) + "\n\n" + std::string(stage_materials);
  return p;
}

// ---------------------------------------------------------------------------
// Stage materials

/// Visible name of every candidate as this agent sees it, in candidate order.
inline std::vector<std::pair<std::string, ParticipantId>> candidate_names(const PersonaContext& persona,
                                                                          const CandidateSet& candidates) {
  std::vector<std::pair<std::string, ParticipantId>> out;
  for (const auto& c : candidates.members) {
    if (c == persona.participant) {
      out.emplace_back(persona.visible_name, c);
      continue;
    }
    auto it = std::find_if(persona.peers.begin(), persona.peers.end(), [&](const auto& p) { return p.id == c; });
    if (it == persona.peers.end()) throw ValidationError("candidate '" + c.str() + "' is not in the agent's group");
    out.emplace_back(it->visible_name, c);
  }
  return out;
}

inline std::string peer_label(const PeerView& peer) {
  return peer.pronouns ? peer.visible_name + " (" + *peer.pronouns + ")" : peer.visible_name;
}

/// Instructions and context for `stage`, as seen by `persona`.
inline std::string stage_materials(const PersonaContext& persona, const GroupRecord& group, StageId stage,
                                   const CandidateSet* candidates, const TaskKey* key) {
  std::string s;
  switch (stage) {
    case StageId::kProfile: {
      s += "You have joined a group of four participants. The other members see you as \"" + persona.visible_name +
           "\".\nYour group members are: ";
      for (std::size_t i = 0; i < persona.peers.size(); ++i) {
        if (i) s += ", ";
        s += peer_label(persona.peers[i]);
      }
      s += ".\n\nReply with a short greeting to your group in one or two sentences.";
      break;
    }
    case StageId::kDiscussion: {
      s += "Your group has finished a chat discussion about a survival scenario: the group is stranded on a life "
           "raft and must judge which items matter most. The full transcript follows.\n\n";
      if (group.transcript.empty()) s += "(no messages)\n";
      for (const auto& msg : group.transcript) {
        s += msg.speaker_alias;
        if (msg.speaker_alias == persona.visible_name) s += " (you)";
        s += ": " + msg.text + "\n";
      }
      s += "\nReflect on the discussion. Which members seemed most knowledgeable and most competent to lead? "
           "Reply in a few sentences.";
      break;
    }
    case StageId::kSelfNomination:
      s += "Your group sees you as \"" + persona.visible_name + "\". ";
      s += "The group will now elect a leader. The leader completes the survival task on behalf of the group, and "
           "the reward of every member depends on how well the leader performs. Only the two members with the "
           "highest self-nomination scores become eligible candidates.\n\n"
           "On a scale from 0 (not at all willing) to 10 (extremely willing), how willing are you to be the "
           "group's leader?\n\n"
           "End your reply with a final line of the form:\nANSWER: <number from 0 to 10>";
      break;
    case StageId::kElectionBallot: {
      if (!candidates) throw ValidationError("ballot stage needs a candidate set");
      s += "The eligible candidates, chosen by self-nomination, are listed below. Rank every candidate from most "
           "preferred (1) to least preferred as the group's leader.\n\nCandidates: ";
      const auto names = candidate_names(persona, *candidates);
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) s += " | ";
        s += names[i].first;
        if (names[i].second == persona.participant) s += " (you)";
      }
      s += "\n\nEnd your reply with a final line of the form:\nANSWER: ";
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) s += " ";
        s += std::to_string(i + 1) + ". <name>";
      }
      break;
    }
    case StageId::kTask: {
      if (!key) throw ValidationError("task stage needs a task key");
      s += "Complete the survival task individually. For each question choose one of the listed options.\n\n";
      for (const auto& item : key->items) {
        s += "- " + item.id + ":";
        if (!item.prompt.empty()) s += " " + item.prompt;
        if (!item.options.empty()) {
          s += " Options: ";
          for (std::size_t i = 0; i < item.options.size(); ++i) {
            if (i) s += " | ";
            s += item.options[i];
          }
        }
        s += "\n";
      }
      s += "\nEnd your reply with a final block listing one answer per line:\nANSWER:\n";
      for (const auto& item : key->items) s += item.id + ": <option>\n";
      s.pop_back();
      break;
    }
  }
  return s;
}

/// Appended to the current stage when a reply has to be re-asked.
inline std::string format_reminder(std::string_view problem) {
  return "\n\n**Format reminder:** Your previous reply could not be used (" + std::string(problem) +
         "). Reply again and end with the required ANSWER line.";
}

}  // namespace lostatsea
