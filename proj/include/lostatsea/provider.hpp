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

// Text-in/text-out completion contract shared by every model vendor, plus
// the retrying request loop and two in-process providers (a deterministic
// stub and a scripted one for tests).

#include <array>
#include <chrono>
#include <ctime>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "lostatsea/prompt.hpp"

namespace lostatsea {

enum class FailureKind { kTransport, kRateLimit, kTimeout, kHttpStatus, kBadResponse, kCredentials };

inline std::string_view to_string(FailureKind k) noexcept {
  switch (k) {
    case FailureKind::kTransport: return "transport";
    case FailureKind::kRateLimit: return "rate_limit";
    case FailureKind::kTimeout: return "timeout";
    case FailureKind::kHttpStatus: return "http_status";
    case FailureKind::kBadResponse: return "bad_response";
    case FailureKind::kCredentials: return "credentials";
  }
  return "?";
}

/// One failed completion attempt.
class ProviderFailure : public SystemError {
 public:
  ProviderFailure(FailureKind kind, const std::string& msg, bool retryable = true)
      : SystemError(msg), kind_(kind), retryable_(retryable) {}
  FailureKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  FailureKind kind_;
  bool retryable_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds backoff_before(int attempt) const {
    // attempt is 1-based; no wait before the first.
    if (attempt <= 1) return std::chrono::milliseconds{0};
    double ms = static_cast<double>(initial_backoff.count());
    for (int i = 2; i < attempt; ++i) ms *= multiplier;
    return std::chrono::milliseconds{static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count())))};
  }
};

struct ProviderConfig {
  std::string provider = "stub";  // stub | openai | anthropic
  std::string endpoint;           // base URL for HTTP providers
  std::string model = "stub";
  std::string api_key_env;        // NAME of the environment variable holding the key
  double temperature = 1.0;
  int max_output_tokens = 2048;
  std::chrono::milliseconds timeout{60000};
  int parallelism = 1;
  RetryPolicy retry;
  int reask_limit = 3;  // re-asks after an unusable reply

  void validate() const {
    if (parallelism < 1) throw ValidationError("provider config: parallelism must be >= 1");
    if (retry.max_attempts < 1) throw ValidationError("provider config: max_attempts must be >= 1");
    if (reask_limit < 0) throw ValidationError("provider config: reask_limit must be >= 0");
    if (!(temperature >= 0.0)) throw ValidationError("provider config: temperature must be >= 0");
    if (max_output_tokens < 1) throw ValidationError("provider config: max_output_tokens must be >= 1");
    if (model.empty()) throw ValidationError("provider config: model must be non-empty");
  }
};

struct CompletionRequest {
  std::string prompt;
  std::string model;
  double temperature = 1.0;
  int max_output_tokens = 2048;
  std::chrono::milliseconds timeout{60000};
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  /// Returns the reply text or throws ProviderFailure. Must be thread-safe.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

struct AttemptRecord {
  int attempt = 0;
  bool ok = false;
  std::optional<FailureKind> failure;
  std::string message;
  std::string timestamp;
};

struct CompletionResult {
  std::string text;
  std::vector<AttemptRecord> attempts;
};

/// Every attempt failed or a non-retryable failure occurred.
class ProviderExhausted : public SystemError {
 public:
  ProviderExhausted(const std::string& msg, std::vector<AttemptRecord> attempts)
      : SystemError(msg), attempts_(std::move(attempts)) {}
  const std::vector<AttemptRecord>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<AttemptRecord> attempts_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

inline CompletionResult request_completion(const StagePrompt& prompt, const ProviderConfig& config,
                                           CompletionProvider& provider, const Sleeper& sleep = real_sleep) {
  config.validate();
  CompletionRequest req{prompt.text(), config.model, config.temperature, config.max_output_tokens, config.timeout};
  CompletionResult result;
  for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
    if (attempt > 1 && sleep) sleep(config.retry.backoff_before(attempt));
    AttemptRecord rec;
    rec.attempt = attempt;
    rec.timestamp = utc_timestamp();
    try {
      result.text = provider.complete(req);
      rec.ok = true;
      result.attempts.push_back(std::move(rec));
      return result;
    } catch (const ProviderFailure& f) {
      rec.failure = f.kind();
      rec.message = f.what();
      result.attempts.push_back(std::move(rec));
      if (!f.retryable()) break;
    }
  }
  const auto& last = result.attempts.back();
  throw ProviderExhausted("completion failed after " + std::to_string(result.attempts.size()) + " attempt(s): " +
                              std::string(to_string(*last.failure)) + ": " + last.message,
                          std::move(result.attempts));
}

// ---------------------------------------------------------------------------
// In-process providers

/// Deterministic offline provider. Replies are a pure function of (seed,
/// prompt) and always well-formed, so simulations are reproducible.
class StubProvider final : public CompletionProvider {
 public:
  explicit StubProvider(std::uint64_t seed = 0) : seed_(seed) {}

  std::string complete(const CompletionRequest& request) override {
    const std::string& prompt = request.prompt;
    Engine engine(splitmix64(seed_ ^ fnv1a(prompt)));
    const std::string stage = line_value(prompt, "Stage id: ");
    if (stage == "SELF_NOMINATION") {
      const auto half_points = uniform_index(engine, 21);
      const double w = static_cast<double>(half_points) / 2.0;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", w);
      return std::string("I weighed how useful I could be as leader.\nANSWER: ") + buf;
    }
    if (stage == "ELECTION_BALLOT") {
      auto names = split(line_value(prompt, "Candidates: "), " | ");
      for (auto& n : names)
        if (n.ends_with(" (you)")) n.resize(n.size() - 6);
      seeded_shuffle(names, engine);
      std::string reply = "My ranking follows.\nANSWER:";
      for (std::size_t i = 0; i < names.size(); ++i) reply += " " + std::to_string(i + 1) + ". " + names[i];
      return reply;
    }
    if (stage == "TASK") {
      std::string reply = "ANSWER:";
      for (const auto& line : lines(prompt)) {
        if (!line.starts_with("- ")) continue;
        const auto colon = line.find(": ");
        const auto opts = line.find(" Options: ");
        if (colon == std::string::npos || opts == std::string::npos) continue;
        auto options = split(line.substr(opts + 10), " | ");
        reply += "\n" + line.substr(2, colon - 2) + ": " + options[uniform_index(engine, options.size())];
      }
      return reply;
    }
    if (stage == "DISCUSSION") {
      static constexpr std::array<std::string_view, 3> kReflections = {
          "Several members made thoughtful points about which items to keep.",
          "One or two members seemed confident about the ranking; the rest mostly agreed.",
          "The discussion was short, but the reasoning about signalling items was convincing."};
      return std::string(kReflections[uniform_index(engine, kReflections.size())]);
    }
    static constexpr std::array<std::string_view, 3> kGreetings = {
        "Hello everyone, glad to be working with you.", "Hi all, looking forward to this.",
        "Hey team, let's do well on this one."};
    return std::string(kGreetings[uniform_index(engine, kGreetings.size())]);
  }

 private:
  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string::npos) nl = text.size();
      out.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
    return out;
  }
  static std::string line_value(const std::string& text, std::string_view prefix) {
    // Last occurrence: the current stage comes after earlier replies.
    for (auto&& l : [&] { auto v = lines(text); std::reverse(v.begin(), v.end()); return v; }())
      if (l.starts_with(prefix)) return l.substr(prefix.size());
    return {};
  }
  static std::vector<std::string> split(const std::string& s, std::string_view sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find(sep, start);
      out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + sep.size();
    }
    return out;
  }

  std::uint64_t seed_;
};

/// Replays a fixed script of replies and failures, in order.
class ScriptedProvider final : public CompletionProvider {
 public:
  using Step = std::variant<std::string, FailureKind>;

  explicit ScriptedProvider(std::vector<Step> script) : script_(script.begin(), script.end()) {}

  std::string complete(const CompletionRequest& request) override {
    std::lock_guard lock(mu_);
    prompts_.push_back(request.prompt);
    if (script_.empty()) throw ProviderFailure(FailureKind::kTransport, "script exhausted", false);
    Step step = std::move(script_.front());
    script_.pop_front();
    if (auto* text = std::get_if<std::string>(&step)) return *text;
    const auto kind = std::get<FailureKind>(step);
    throw ProviderFailure(kind, "scripted " + std::string(to_string(kind)) + " failure");
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return prompts_.size();
  }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<Step> script_;
  std::vector<std::string> prompts_;
};

}  // namespace lostatsea
