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

// Providers, the retry loop, agent simulation and the prompt goldens.
//
// Set LOSTATSEA_UPDATE_GOLDENS=1 to rewrite tests/golden from the current
// renderer; review the diff before committing.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "lostatsea/http_provider.hpp"
#include "lostatsea/simulate.hpp"
#include "test_support.hpp"

namespace lostatsea {
namespace {

using namespace std::chrono_literals;
using testing::fixture_cohort;
using testing::fixture_key;
using testing::group_by_id;

const Sleeper kNoSleep = [](std::chrono::milliseconds) {};

StagePrompt some_prompt() {
  const auto p = build_persona(group_by_id(fixture_cohort(), "hi-01"), ParticipantId("p03"), Treatment::kIdentified);
  return render_stage_prompt(p, {}, StageId::kProfile, "materials");
}

Cohort only(const std::string& group_id) {
  Cohort c = fixture_cohort();
  c.groups = {group_by_id(c, group_id)};
  return c;
}

// ---------------------------------------------------------------------------
// request_completion

TEST(RequestCompletion, ReturnsProviderText) {
  ScriptedProvider provider({std::string("canned text")});
  const auto r = request_completion(some_prompt(), ProviderConfig{}, provider, kNoSleep);
  EXPECT_EQ(r.text, "canned text");
  EXPECT_EQ(r.attempts.size(), 1u);
}

TEST(RequestCompletion, TwoFailuresThenSuccessUsesThreeAttempts) {
  ScriptedProvider provider({FailureKind::kRateLimit, FailureKind::kTimeout, std::string("ok")});
  std::vector<std::chrono::milliseconds> waits;
  const Sleeper record = [&](std::chrono::milliseconds d) { waits.push_back(d); };
  ProviderConfig config;
  config.retry.max_attempts = 3;
  const auto r = request_completion(some_prompt(), config, provider, record);
  EXPECT_EQ(r.text, "ok");
  ASSERT_EQ(r.attempts.size(), 3u);
  EXPECT_EQ(*r.attempts[0].failure, FailureKind::kRateLimit);
  EXPECT_EQ(*r.attempts[1].failure, FailureKind::kTimeout);
  EXPECT_TRUE(r.attempts[2].ok);
  EXPECT_EQ(waits, (std::vector<std::chrono::milliseconds>{500ms, 1000ms}));
}

TEST(RequestCompletion, AlwaysFailingStopsAtMaxAttempts) {
  ScriptedProvider provider({FailureKind::kTransport, FailureKind::kTransport, FailureKind::kTransport});
  ProviderConfig config;
  config.retry.max_attempts = 2;
  try {
    request_completion(some_prompt(), config, provider, kNoSleep);
    FAIL() << "no error";
  } catch (const ProviderExhausted& e) {
    EXPECT_EQ(e.attempts().size(), 2u);
  }
  EXPECT_EQ(provider.calls(), 2u);
}

TEST(RequestCompletion, NonRetryableFailureStopsImmediately) {
  class Denied final : public CompletionProvider {
   public:
    std::string complete(const CompletionRequest&) override {
      ++calls;
      throw ProviderFailure(FailureKind::kCredentials, "denied", false);
    }
    int calls = 0;
  } provider;
  EXPECT_THROW(request_completion(some_prompt(), ProviderConfig{}, provider, kNoSleep), ProviderExhausted);
  EXPECT_EQ(provider.calls, 1);
}

TEST(RetryPolicy, BackoffGrowsAndCaps) {
  RetryPolicy p;
  p.initial_backoff = 100ms;
  p.multiplier = 3;
  p.max_backoff = 1000ms;
  EXPECT_EQ(p.backoff_before(1), 0ms);
  EXPECT_EQ(p.backoff_before(2), 100ms);
  EXPECT_EQ(p.backoff_before(3), 300ms);
  EXPECT_EQ(p.backoff_before(4), 900ms);
  EXPECT_EQ(p.backoff_before(5), 1000ms);
}

TEST(ProviderConfig, ValidationRejectsNonsense) {
  ProviderConfig c;
  c.parallelism = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.retry.max_attempts = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.provider = "mystery";
  EXPECT_THROW(make_provider(c, 0), ValidationError);
}

// ---------------------------------------------------------------------------
// StubProvider

TEST(StubProvider, RepliesArePureFunctionsOfSeedAndPrompt) {
  StubProvider a(5), b(5), c(6);
  CompletionRequest r;
  r.prompt = some_prompt().text();
  EXPECT_EQ(a.complete(r), b.complete(r));
  EXPECT_EQ(a.complete(r), a.complete(r));
  // A different seed may or may not change this particular greeting, but
  // it must change at least one of a handful of prompts.
  bool differs = false;
  for (int i = 0; i < 8 && !differs; ++i) {
    r.prompt += " ";
    differs = a.complete(r) != c.complete(r);
  }
  EXPECT_TRUE(differs);
}

// ---------------------------------------------------------------------------
// HTTP providers against a local server

class LocalServer {
 public:
  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(R"(/.*)", [handler](const httplib::Request& req, httplib::Response& res) { handler(req, res); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string base(const std::string& path = "/v1") const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ProviderConfig http_config(const std::string& provider, const std::string& endpoint) {
  ProviderConfig c;
  c.provider = provider;
  c.endpoint = endpoint;
  c.model = "test-model";
  c.api_key_env = "LOSTATSEA_TEST_KEY";
  c.timeout = 5000ms;
  return c;
}

TEST(HttpProvider, ResolveEndpointAppendsWirePath) {
  auto e = resolve_endpoint("https://api.example.com/v1", WireFormat::kOpenAiChat);
  EXPECT_EQ(e.origin, "https://api.example.com");
  EXPECT_EQ(e.path, "/v1/chat/completions");
  e = resolve_endpoint("http://localhost:8080/", WireFormat::kAnthropicMessages);
  EXPECT_EQ(e.origin, "http://localhost:8080");
  EXPECT_EQ(e.path, "/messages");
}

TEST(HttpProvider, OpenAiFormatRoundTrip) {
  ::setenv("LOSTATSEA_TEST_KEY", "sk-local", 1);
  std::string auth, path, model;
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    path = req.path;
    model = Json::parse(req.body).at("model");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"ANSWER: 7"}}]})", "application/json");
  });
  auto provider = make_provider(http_config("openai", server.base()), 0);
  CompletionRequest r;
  r.prompt = "hi";
  r.model = "test-model";
  EXPECT_EQ(provider->complete(r), "ANSWER: 7");
  EXPECT_EQ(auth, "Bearer sk-local");
  EXPECT_EQ(path, "/v1/chat/completions");
  EXPECT_EQ(model, "test-model");
}

TEST(HttpProvider, AnthropicFormatRoundTrip) {
  ::setenv("LOSTATSEA_TEST_KEY", "ak-local", 1);
  std::string key, version;
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    key = req.get_header_value("x-api-key");
    version = req.get_header_value("anthropic-version");
    res.set_content(R"({"content":[{"type":"text","text":"Hello "},{"type":"text","text":"there"}]})",
                    "application/json");
  });
  auto provider = make_provider(http_config("anthropic", server.base()), 0);
  EXPECT_EQ(provider->complete({}), "Hello there");
  EXPECT_EQ(key, "ak-local");
  EXPECT_FALSE(version.empty());
}

TEST(HttpProvider, StatusCodesMapToFailureKinds) {
  ::setenv("LOSTATSEA_TEST_KEY", "sk-local", 1);
  int status = 429;
  std::string body = "{}";
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content(body, "application/json");
  });
  auto provider = make_provider(http_config("openai", server.base()), 0);
  auto kind_of = [&]() -> std::pair<FailureKind, bool> {
    try {
      provider->complete({});
    } catch (const ProviderFailure& f) {
      return {f.kind(), f.retryable()};
    }
    ADD_FAILURE() << "no failure for status " << status;
    return {FailureKind::kTransport, false};
  };
  EXPECT_EQ(kind_of(), std::make_pair(FailureKind::kRateLimit, true));
  status = 401;
  EXPECT_EQ(kind_of(), std::make_pair(FailureKind::kCredentials, false));
  status = 503;
  EXPECT_EQ(kind_of(), std::make_pair(FailureKind::kHttpStatus, true));
  status = 400;
  EXPECT_EQ(kind_of(), std::make_pair(FailureKind::kHttpStatus, false));
  status = 200;
  body = "not json";
  EXPECT_EQ(kind_of(), std::make_pair(FailureKind::kBadResponse, true));
}

TEST(HttpProvider, MissingKeyIsANonRetryableCredentialFailure) {
  ::unsetenv("LOSTATSEA_TEST_KEY_ABSENT");
  auto config = http_config("openai", "http://127.0.0.1:9/v1");
  config.api_key_env = "LOSTATSEA_TEST_KEY_ABSENT";
  auto provider = make_provider(config, 0);
  try {
    provider->complete({});
    FAIL() << "no failure";
  } catch (const ProviderFailure& f) {
    EXPECT_EQ(f.kind(), FailureKind::kCredentials);
    EXPECT_FALSE(f.retryable());
    // The message names the variable, never a value.
    EXPECT_NE(std::string(f.what()).find("LOSTATSEA_TEST_KEY_ABSENT"), std::string::npos);
  }
}

TEST(HttpProvider, NeedsEndpointAndKeyName) {
  auto config = http_config("openai", "");
  EXPECT_THROW(make_provider(config, 0), ValidationError);
  config = http_config("openai", "http://127.0.0.1:9");
  config.api_key_env.clear();
  EXPECT_THROW(make_provider(config, 0), ValidationError);
}

// ---------------------------------------------------------------------------
// run_agent_cohort

TEST(Simulate, StubRunsAreReproducible) {
  const auto human = fixture_cohort();
  const auto key = fixture_key();
  SimulationOptions options;
  options.key = &key;
  options.sleeper = &kNoSleep;
  ProviderConfig config;
  StubProvider p1(7), p2(7);
  const auto a = run_agent_cohort(only("hp-01"), Treatment::kPseudonymous, config, p1, 7, options);
  const auto b = run_agent_cohort(only("hp-01"), Treatment::kPseudonymous, config, p2, 7, options);
  ASSERT_TRUE(a.diagnostics.empty()) << a.diagnostics.front().message;
  ASSERT_EQ(a.cohort.groups.size(), 1u);
  EXPECT_EQ(serialize_cohort(a.cohort), serialize_cohort(b.cohort));
  const auto& g = a.cohort.groups[0];
  EXPECT_EQ(g.origin, Origin::kAgent);
  EXPECT_EQ(*g.model, "stub");
  EXPECT_TRUE(g.complete());
  EXPECT_EQ(a.traces.size(), 4u);
  for (const auto& t : a.traces) EXPECT_EQ(t.stages.size(), 5u);
}

TEST(Simulate, PromptsEmbedOnlyTheAgentsOwnEarlierReplies) {
  const auto key = fixture_key();
  SimulationOptions options;
  options.key = &key;
  options.sleeper = &kNoSleep;
  StubProvider p(3);
  const auto r = run_agent_cohort(only("hi-01"), Treatment::kIdentified, ProviderConfig{}, p, 3, options);
  ASSERT_TRUE(r.diagnostics.empty());
  for (const auto& t : r.traces) {
    for (std::size_t k = 0; k < t.stages.size(); ++k) {
      const std::string& block = t.stages[k].prompt.previous_stages_block;
      for (std::size_t j = 0; j < k; ++j)
        EXPECT_NE(block.find(t.stages[j].reply), std::string::npos) << t.participant.str() << " stage " << k;
      if (k == 0) {
        EXPECT_EQ(block, "(none)");
      }
    }
  }
}

TEST(Simulate, NoDemographicsPromptsCarryNoIdentityTokens) {
  const auto key = fixture_key();
  SimulationOptions options;
  options.key = &key;
  options.sleeper = &kNoSleep;
  StubProvider p(11);
  const auto source = only("hp-01");
  const auto r = run_agent_cohort(source, Treatment::kNoDemographics, ProviderConfig{}, p, 11, options);
  ASSERT_TRUE(r.diagnostics.empty());
  const auto tokens = testing::demographic_tokens(source.groups[0]);
  std::size_t prompts = 0;
  for (const auto& t : r.traces)
    for (const auto& e : t.stages) {
      ++prompts;
      const auto hits = testing::scan_tokens(e.prompt.text(), tokens);
      EXPECT_TRUE(hits.empty()) << t.participant.str() << " " << to_string(e.stage) << ": " << hits.front();
    }
  EXPECT_EQ(prompts, 20u);
}

TEST(Simulate, UnusableReplyIsReaskedWithReminder) {
  const auto key = fixture_key();
  SimulationOptions options;
  options.key = &key;
  options.sleeper = &kNoSleep;
  // Members are asked in id order at each stage. p01 answers its
  // nomination with nonsense first and recovers on the re-ask.
  std::vector<ScriptedProvider::Step> script;
  for (int i = 0; i < 8; ++i) script.emplace_back(std::string("Hello."));
  script.emplace_back(std::string("ANSWER: lots"));
  for (const char* w : {"ANSWER: 8", "ANSWER: 3", "ANSWER: 7", "ANSWER: 5"}) script.emplace_back(std::string(w));
  for (const char* b : {"1. Marcus 2. Priya", "1. Priya 2. Marcus", "1. Priya 2. Marcus", "1. Marcus 2. Priya"})
    script.emplace_back(std::string("ANSWER: ") + b);
  for (int i = 0; i < 4; ++i) script.emplace_back(std::string("ANSWER:\nq1: shaving_mirror"));
  ScriptedProvider provider(script);
  const auto r = run_agent_cohort(only("hi-01"), Treatment::kIdentified, ProviderConfig{}, provider, 1, options);
  ASSERT_TRUE(r.diagnostics.empty()) << r.diagnostics.front().message;
  const auto& entry = r.traces[0].stages[2];
  EXPECT_EQ(entry.asks, 2);
  ASSERT_EQ(entry.parse_errors.size(), 1u);
  EXPECT_NE(entry.prompt.current_stage_block.find("Format reminder"), std::string::npos);
  EXPECT_EQ(*r.cohort.groups[0].member(ParticipantId("p01")).nomination, 8.0);
  EXPECT_EQ(r.cohort.groups[0].election->elected, ParticipantId("p01"));
}

TEST(Simulate, ExhaustedProviderBecomesADiagnostic) {
  SimulationOptions options;
  options.sleeper = &kNoSleep;
  ScriptedProvider provider({});
  const auto r = run_agent_cohort(only("hi-01"), Treatment::kIdentified, ProviderConfig{}, provider, 1, options);
  EXPECT_TRUE(r.cohort.groups.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].group_id, "hi-01");
}

TEST(Simulate, PreconditionsAreEnforced) {
  StubProvider p(1);
  auto no_transcript = only("hp-01");
  no_transcript.groups[0].transcript.clear();
  EXPECT_THROW(run_agent_cohort(no_transcript, Treatment::kPseudonymous, ProviderConfig{}, p, 1), ValidationError);

  auto synthetic = only("hp-01");
  synthetic.groups[0].transcript = {{"Otter", 0, std::string(kSyntheticTranscriptMarker)}};
  EXPECT_THROW(run_agent_cohort(synthetic, Treatment::kPseudonymous, ProviderConfig{}, p, 1), ValidationError);
  SimulationOptions forced;
  forced.allow_synthetic_transcripts = true;
  forced.sleeper = &kNoSleep;
  EXPECT_TRUE(run_agent_cohort(synthetic, Treatment::kPseudonymous, ProviderConfig{}, p, 1, forced).diagnostics.empty());

  EXPECT_THROW(matched_agent_group(group_by_id(fixture_cohort(), "hi-01"), Treatment::kPseudonymous, "m"),
               ValidationError);
  EXPECT_THROW(matched_agent_group(group_by_id(fixture_cohort(), "hp-01"), Treatment::kIdentified, "m"),
               ValidationError);
}

TEST(Simulate, TracesAreOneJsonLinePerStage) {
  const auto key = fixture_key();
  SimulationOptions options;
  options.key = &key;
  options.sleeper = &kNoSleep;
  StubProvider p(2);
  const auto r = run_agent_cohort(only("hp-01"), Treatment::kPseudonymous, ProviderConfig{}, p, 2, options);
  std::ostringstream os;
  write_traces(os, r.traces);
  std::istringstream in(os.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = Json::parse(line);
    EXPECT_EQ(j.at("group_id"), "hp-01");
    EXPECT_EQ(j.at("model"), "stub");
    EXPECT_GE(j.at("attempt_count").get<int>(), 1);
    ++n;
  }
  EXPECT_EQ(n, 20);
}

// ---------------------------------------------------------------------------
// Prompt goldens

TEST(PromptGolden, RendersMatchStoredFiles) {
  const auto cohort = fixture_cohort();
  const auto key = fixture_key();
  const bool update = std::getenv("LOSTATSEA_UPDATE_GOLDENS") != nullptr;
  for (const auto& c : testing::golden_cases()) {
    const std::string text = testing::render_golden(c, cohort, key);
    const auto path = testing::golden_path(c.file);
    if (update) {
      std::ofstream(path, std::ios::binary) << text;
      continue;
    }
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(text, testing::read_text(path)) << c.file;
  }
}

TEST(PromptGolden, NoDemographicsGoldensHaveNoIdentityTokens) {
  const auto cohort = fixture_cohort();
  const auto key = fixture_key();
  const auto tokens = testing::demographic_tokens(group_by_id(cohort, "hp-01"));
  for (const auto& c : testing::golden_cases()) {
    if (c.treatment != Treatment::kNoDemographics) continue;
    const auto hits = testing::scan_tokens(testing::render_golden(c, cohort, key), tokens);
    EXPECT_TRUE(hits.empty()) << c.file << ": " << hits.front();
  }
}

}  // namespace
}  // namespace lostatsea
