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

// Matched agent cohorts. Each human group is rebuilt with one agent per
// member; agents read the human transcript and answer the remaining stages
// one prompt at a time. Groups are independent, so they are dispatched to a
// bounded worker pool and collected back in input order.

#include <atomic>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "lostatsea/cohort_io.hpp"
#include "lostatsea/parse.hpp"
#include "lostatsea/prompt.hpp"
#include "lostatsea/provider.hpp"

namespace lostatsea {

/// Marker carried by generated placeholder transcripts.
inline constexpr std::string_view kSyntheticTranscriptMarker = "[synthetic placeholder]";

struct AgentStageEntry {
  StageId stage = StageId::kProfile;
  StagePrompt prompt;  // prompt of the accepted ask
  std::string reply;
  Json parsed;
  int asks = 0;  // 1 + re-asks
  std::vector<std::string> parse_errors;
  std::vector<AttemptRecord> attempts;  // provider attempts over all asks
  std::string started_at;
  std::string finished_at;

  int attempt_count() const { return static_cast<int>(attempts.size()); }
};

struct AgentTrace {
  std::string group_id;
  ParticipantId participant;
  Treatment treatment = Treatment::kIdentified;
  std::string model;
  std::vector<AgentStageEntry> stages;
};

struct SimulationOptions {
  const TaskKey* key = nullptr;  // default_task_key() when null
  bool allow_synthetic_transcripts = false;
  const Sleeper* sleeper = nullptr;  // real_sleep when null
};

struct SimulationDiagnostic {
  std::string group_id;
  std::string message;
};

struct SimulationResult {
  Cohort cohort;
  std::vector<AgentTrace> traces;  // group order, then member id order
  std::vector<SimulationDiagnostic> diagnostics;
};

/// An agent reply stayed unusable after every re-ask.
class ReplyExhausted : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline Json stage_value_to_json(const StageValue& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, double>) return x;
        else if constexpr (std::is_same_v<T, std::vector<ParticipantId>>) {
          Json a = Json::array();
          for (const auto& id : x) a.push_back(id.str());
          return a;
        } else {
          if (x.answers) return Json(*x.answers);
          return Json{{"correct", x.score->correct}, {"max_items", x.score->max_items}};
        }
      },
      v);
}

/// Answers every stage by prompting a model as the member's persona.
class AgentResponder final : public StageResponder {
 public:
  AgentResponder(const ProviderConfig& config, CompletionProvider& provider, const Sleeper& sleeper)
      : config_(config), provider_(provider), sleeper_(sleeper) {}

  StageValue respond(const SessionView& view, const ParticipantRecord& member, StageId stage) override {
    auto persona_it = personas_.find(member.id);
    if (persona_it == personas_.end())
      persona_it = personas_.emplace(member.id, build_persona(view.group, member.id, view.group.treatment)).first;
    const PersonaContext& persona = persona_it->second;
    auto& history = histories_[member.id];
    auto& trace = trace_for(view.group, member.id);

    const std::string materials = stage_materials(persona, view.group, stage, view.candidates, view.key);
    ParseContext ctx;
    if (stage == StageId::kElectionBallot) ctx.candidates = candidate_names(persona, *view.candidates);
    ctx.key = view.key;

    AgentStageEntry entry;
    entry.stage = stage;
    entry.started_at = utc_timestamp();
    StagePrompt prompt = render_stage_prompt(persona, history, stage, materials);
    const std::string base_stage_block = prompt.current_stage_block;
    for (int ask = 0; ask <= config_.reask_limit; ++ask) {
      ++entry.asks;
      CompletionResult result;
      try {
        result = request_completion(prompt, config_, provider_, sleeper_);
      } catch (const ProviderExhausted& e) {
        entry.attempts.insert(entry.attempts.end(), e.attempts().begin(), e.attempts().end());
        entry.finished_at = utc_timestamp();
        trace.stages.push_back(std::move(entry));
        throw;
      }
      entry.attempts.insert(entry.attempts.end(), result.attempts.begin(), result.attempts.end());
      try {
        StageValue value = parse_stage_response(stage, result.text, ctx);
        entry.prompt = prompt;
        entry.reply = result.text;
        entry.parsed = stage_value_to_json(value);
        entry.finished_at = utc_timestamp();
        history.push_back({stage, result.text});
        trace.stages.push_back(std::move(entry));
        return value;
      } catch (const ReplyParseError& e) {
        entry.parse_errors.emplace_back(e.what());
        entry.reply = result.text;
        prompt.current_stage_block = base_stage_block + format_reminder(e.what());
      }
    }
    entry.prompt = prompt;
    entry.finished_at = utc_timestamp();
    const std::string last = entry.parse_errors.back();
    trace.stages.push_back(std::move(entry));
    throw ReplyExhausted("agent '" + member.id.str() + "' gave no usable " + std::string(to_string(stage)) +
                         " reply after " + std::to_string(config_.reask_limit + 1) + " asks: " + last);
  }

  std::vector<AgentTrace> take_traces() {
    std::vector<AgentTrace> out;
    for (auto& [id, t] : traces_) out.push_back(std::move(t));
    traces_.clear();
    return out;
  }

 private:
  AgentTrace& trace_for(const GroupRecord& g, const ParticipantId& id) {
    auto it = traces_.find(id);
    if (it == traces_.end()) {
      AgentTrace t{g.group_id, id, g.treatment, config_.model, {}};
      it = traces_.emplace(id, std::move(t)).first;
    }
    return it->second;
  }

  const ProviderConfig& config_;
  CompletionProvider& provider_;
  const Sleeper& sleeper_;
  std::map<ParticipantId, PersonaContext> personas_;
  std::map<ParticipantId, std::vector<StageRecord>> histories_;
  std::map<ParticipantId, AgentTrace> traces_;
};

/// Agent-origin copy of a human group under `treatment`: identities and the
/// transcript are kept, every stage output is dropped.
inline GroupRecord matched_agent_group(const GroupRecord& human, Treatment treatment, const std::string& model) {
  if (human.origin == Origin::kAgent)
    throw ValidationError("group '" + human.group_id + "' is already an agent group");
  const bool source_pseudonymous = uses_pseudonyms(human.treatment);
  if ((treatment == Treatment::kIdentified) == source_pseudonymous)
    throw ValidationError("group '" + human.group_id + "': " + std::string(to_string(treatment)) +
                          " agents cannot be matched to a " + std::string(to_string(human.treatment)) + " group");
  GroupRecord g = human;
  g.treatment = treatment;
  g.origin = Origin::kAgent;
  g.model = model;
  g.election.reset();
  g.gap.reset();
  for (auto& m : g.members) {
    m.nomination.reset();
    m.ballot.reset();
    m.task_answers.reset();
    m.score.reset();
  }
  return g;
}

inline bool has_synthetic_transcript(const GroupRecord& g) {
  return std::any_of(g.transcript.begin(), g.transcript.end(), [](const TranscriptMessage& m) {
    return m.text.find(kSyntheticTranscriptMarker) != std::string::npos;
  });
}

/// Simulate every group of `human` under `treatment`. Results depend only on
/// the inputs, the provider's replies and `seed`, never on parallelism.
inline SimulationResult run_agent_cohort(const Cohort& human, Treatment treatment, const ProviderConfig& config,
                                         CompletionProvider& provider, std::uint64_t seed,
                                         const SimulationOptions& options = {}) {
  config.validate();
  const TaskKey fallback_key = default_task_key();
  const TaskKey& key = options.key ? *options.key : fallback_key;
  key.validate();
  const Sleeper default_sleeper = real_sleep;
  const Sleeper& sleeper = options.sleeper ? *options.sleeper : default_sleeper;

  for (const auto& g : human.groups) {
    if (g.transcript.empty())
      throw ValidationError("group '" + g.group_id + "' has no discussion transcript; agents need the human transcript");
    if (treatment != Treatment::kNoDemographics && has_synthetic_transcript(g) && !options.allow_synthetic_transcripts)
      throw ValidationError("group '" + g.group_id + "' carries a synthetic placeholder transcript; " +
                            std::string(to_string(treatment)) + " runs on it need the force flag");
  }

  struct Slot {
    std::optional<GroupRecord> group;
    std::vector<AgentTrace> traces;
    std::optional<std::string> failure;
  };
  std::vector<Slot> slots(human.groups.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) {
      const GroupRecord& source = human.groups[i];
      Slot& slot = slots[i];
      AgentResponder responder(config, provider, sleeper);
      try {
        GroupRecord agent = matched_agent_group(source, treatment, config.model);
        SessionOptions session_options;
        session_options.key = &key;
        slot.group = run_session(agent, responder, derive_seed(seed, source.group_id), session_options);
      } catch (const Error& e) {
        slot.failure = e.what();
      }
      slot.traces = responder.take_traces();
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), slots.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  SimulationResult out;
  out.cohort.schema_version = human.schema_version;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& slot = slots[i];
    for (auto& t : slot.traces) out.traces.push_back(std::move(t));
    if (slot.failure) out.diagnostics.push_back({human.groups[i].group_id, *slot.failure});
    else out.cohort.groups.push_back(std::move(*slot.group));
  }
  return out;
}

inline Json attempt_to_json(const AttemptRecord& a) {
  Json j = {{"attempt", a.attempt}, {"ok", a.ok}, {"timestamp", a.timestamp}};
  if (a.failure) {
    j["failure"] = to_string(*a.failure);
    j["message"] = a.message;
  }
  return j;
}

/// One JSON line per executed stage of every agent.
inline void write_traces(std::ostream& out, const std::vector<AgentTrace>& traces) {
  for (const auto& t : traces) {
    for (const auto& e : t.stages) {
      Json attempts = Json::array();
      for (const auto& a : e.attempts) attempts.push_back(attempt_to_json(a));
      Json j = {{"group_id", t.group_id},
                {"participant", t.participant.str()},
                {"treatment", to_string(t.treatment)},
                {"model", t.model},
                {"stage", to_string(e.stage)},
                {"prompt", e.prompt.text()},
                {"reply", e.reply},
                {"parsed", e.parsed},
                {"asks", e.asks},
                {"attempt_count", e.attempt_count()},
                {"parse_errors", e.parse_errors},
                {"attempts", attempts},
                {"started_at", e.started_at},
                {"finished_at", e.finished_at}};
      out << j.dump() << '\n';
    }
  }
}

}  // namespace lostatsea
