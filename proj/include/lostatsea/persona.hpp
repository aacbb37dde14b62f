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

#include <optional>
#include <string>
#include <vector>

#include "lostatsea/records.hpp"

namespace lostatsea {

/// How one other group member appears to the agent.
struct PeerView {
  ParticipantId id;
  std::string visible_name;
  std::optional<std::string> pronouns;  // identified treatment only
};

/// What an agent knows about itself and its group under a treatment.
///
/// identified:      own name, avatar, pronouns and survey; peers by name and pronouns.
/// pseudonymous:    own pronouns and survey, own alias; peers by alias only.
/// no_demographics: own alias only; peers by alias only.
struct PersonaContext {
  Treatment treatment = Treatment::kIdentified;
  ParticipantId participant;
  std::string visible_name;
  std::optional<std::string> display_name;
  std::optional<std::string> avatar;
  std::optional<std::string> pronouns;
  std::optional<SurveyResponses> survey;
  std::vector<PeerView> peers;

  bool has_identity() const { return display_name || avatar || pronouns || survey; }
};

/// Persona for member `who` of the human `source` group, simulated under
/// `treatment`. Identified agents come from identified groups; pseudonymous
/// and no-demographics agents come from pseudonymous groups.
inline PersonaContext build_persona(const GroupRecord& source, const ParticipantId& who, Treatment treatment) {
  const bool source_pseudonymous = uses_pseudonyms(source.treatment);
  if (treatment == Treatment::kIdentified && source_pseudonymous)
    throw ValidationError("group '" + source.group_id + "': identified personas need an identified source group");
  if (treatment != Treatment::kIdentified && !source_pseudonymous)
    throw ValidationError("group '" + source.group_id + "': " + std::string(to_string(treatment)) +
                          " personas need a pseudonymous source group");

  const auto& self = source.member(who);
  PersonaContext p;
  p.treatment = treatment;
  p.participant = self.id;
  p.visible_name = self.visible_name(treatment);
  if (p.visible_name.empty())
    throw ValidationError("participant '" + who.str() + "' has no visible name under " + std::string(to_string(treatment)));

  switch (treatment) {
    case Treatment::kIdentified:
      p.display_name = self.profile.display_name;
      p.avatar = self.profile.avatar;
      p.pronouns = self.profile.pronouns;
      p.survey = self.survey;
      break;
    case Treatment::kPseudonymous:
      p.pronouns = self.profile.pronouns;
      p.survey = self.survey;
      break;
    case Treatment::kNoDemographics:
      break;
  }

  for (const auto& m : source.members) {
    if (m.id == who) continue;
    PeerView peer{m.id, m.visible_name(treatment), std::nullopt};
    if (treatment == Treatment::kIdentified) peer.pronouns = m.profile.pronouns;
    p.peers.push_back(std::move(peer));
  }
  return p;
}

/// Body of the participant-profile section. Without identity context only
/// the alias remains.
inline std::string render_profile_block(const PersonaContext& p) {
  std::string s;
  auto line = [&s](std::string_view label, const std::string& value) {
    s += "- ";
    s += label;
    s += ": ";
    s += value.empty() ? "(not provided)" : value;
    s += '\n';
  };
  if (p.display_name) line("Name", *p.display_name);
  if (p.avatar) line("Avatar", *p.avatar);
  if (p.pronouns) line("Pronouns", *p.pronouns);
  if (p.treatment != Treatment::kIdentified) line("Alias shown to your group", p.visible_name);
  if (p.survey) {
    const auto& sv = *p.survey;
    line("Prior survival knowledge or experience", sv.survival_experience);
    line("Previous leadership experience", sv.leadership_experience);
    line("Willingness to take risks (0 = unwilling, 10 = fully willing)", std::to_string(sv.risk_willingness));
    line("Who is better at survival tasks (1 = men, 10 = women)", std::to_string(sv.gender_task_belief));
    line("Who are better leaders (1 = men, 10 = women)", std::to_string(sv.gender_leader_belief));
  }
  if (!s.empty()) s.pop_back();
  return s;
}

}  // namespace lostatsea
