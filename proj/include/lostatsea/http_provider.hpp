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

// HTTPS chat-completion adapters. Two wire formats cover the usual vendors:
// OpenAI-compatible /chat/completions (also served by most Gemini and Gemma
// gateways) and Anthropic /messages. The API key is read from the
// environment variable named in the config, at request time.

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>

#include "lostatsea/provider.hpp"
#include "lostatsea/records.hpp"

namespace lostatsea {

enum class WireFormat { kOpenAiChat, kAnthropicMessages };

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

/// Split a base URL such as "https://api.example.com/v1" and append the
/// vendor route.
inline Endpoint resolve_endpoint(const std::string& base, WireFormat format) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("provider endpoint '" + base + "' lacks a scheme");
  const auto path_start = base.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  e.path = prefix + (format == WireFormat::kOpenAiChat ? "/chat/completions" : "/messages");
  return e;
}

class HttpProvider final : public CompletionProvider {
 public:
  HttpProvider(const ProviderConfig& config, WireFormat format) : config_(config), format_(format) {
    if (config_.endpoint.empty()) throw ValidationError("provider '" + config_.provider + "' needs an endpoint");
    if (config_.api_key_env.empty())
      throw ValidationError("provider '" + config_.provider + "' needs the name of the API key variable");
    endpoint_ = resolve_endpoint(config_.endpoint, format_);
  }

  std::string complete(const CompletionRequest& request) override {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw ProviderFailure(FailureKind::kCredentials, "environment variable " + config_.api_key_env + " is not set",
                            false);

    httplib::Client client(endpoint_.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout).count();
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout).count() % 1000000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    Json body;
    httplib::Headers headers;
    if (format_ == WireFormat::kOpenAiChat) {
      body = {{"model", request.model},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens},
              {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})}};
      headers.emplace("Authorization", std::string("Bearer ") + key);
    } else {
      body = {{"model", request.model},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens},
              {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})}};
      headers.emplace("x-api-key", key);
      headers.emplace("anthropic-version", "2023-06-01");
    }

    auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout;
      throw ProviderFailure(timed_out ? FailureKind::kTimeout : FailureKind::kTransport,
                            "request to " + endpoint_.origin + " failed: " + httplib::to_string(err));
    }
    if (res->status == 429) throw ProviderFailure(FailureKind::kRateLimit, "rate limited (HTTP 429)");
    if (res->status == 401 || res->status == 403)
      throw ProviderFailure(FailureKind::kCredentials, "HTTP " + std::to_string(res->status), false);
    if (res->status < 200 || res->status >= 300)
      throw ProviderFailure(FailureKind::kHttpStatus, "HTTP " + std::to_string(res->status),
                            res->status >= 500 || res->status == 408);
    return extract_text(res->body);
  }

 private:
  std::string extract_text(const std::string& raw) const {
    try {
      const auto j = Json::parse(raw);
      if (format_ == WireFormat::kOpenAiChat) return j.at("choices").at(0).at("message").at("content").get<std::string>();
      std::string text;
      for (const auto& block : j.at("content"))
        if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
      if (text.empty()) throw ProviderFailure(FailureKind::kBadResponse, "reply carried no text blocks");
      return text;
    } catch (const ProviderFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderFailure(FailureKind::kBadResponse, std::string("malformed provider reply: ") + e.what());
    }
  }

  ProviderConfig config_;
  WireFormat format_;
  Endpoint endpoint_;
};

/// Provider named by config.provider: stub, openai or anthropic.
inline std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.provider == "stub") return std::make_unique<StubProvider>(seed);
  if (config.provider == "openai") return std::make_unique<HttpProvider>(config, WireFormat::kOpenAiChat);
  if (config.provider == "anthropic") return std::make_unique<HttpProvider>(config, WireFormat::kAnthropicMessages);
  throw ValidationError("unknown provider '" + config.provider + "' (expected stub, openai or anthropic)");
}

}  // namespace lostatsea
