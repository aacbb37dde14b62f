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

// Run settings merged from four layers, highest first: command-line flags,
// LOSTATSEA_* environment variables, a key = value file, built-in defaults.
// Also the run manifest written next to every output.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "lostatsea/analytics.hpp"
#include "lostatsea/provider.hpp"

#ifndef LOSTATSEA_VERSION
#define LOSTATSEA_VERSION "0.0.0"
#endif

namespace lostatsea {

inline constexpr std::string_view kVersion = LOSTATSEA_VERSION;

struct Settings {
  ProviderConfig provider;
  std::uint64_t seed = 0;
  double alignment_baseline = kRandomAlignmentBaseline;
  bool yates = false;
  CutoffTiePolicy cutoff_policy = CutoffTiePolicy::kSeededDraw;

  Json to_json() const {
    return {{"provider", provider.provider},
            {"endpoint", provider.endpoint},
            {"model", provider.model},
            {"api_key_env", provider.api_key_env},
            {"temperature", provider.temperature},
            {"max_output_tokens", provider.max_output_tokens},
            {"timeout_ms", provider.timeout.count()},
            {"parallelism", provider.parallelism},
            {"max_attempts", provider.retry.max_attempts},
            {"backoff_ms", provider.retry.initial_backoff.count()},
            {"backoff_max_ms", provider.retry.max_backoff.count()},
            {"reask_limit", provider.reask_limit},
            {"seed", seed},
            {"alignment_baseline", alignment_baseline},
            {"yates", yates},
            {"cutoff_policy", cutoff_policy == CutoffTiePolicy::kSeededDraw ? "seeded_draw" : "expand"}};
  }
};

/// Setting keys; each is also read from the environment as LOSTATSEA_<KEY>.
inline const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "provider",     "endpoint",   "model",          "api_key_env", "temperature", "max_output_tokens",
      "timeout_ms",   "parallelism", "max_attempts",  "backoff_ms",  "backoff_max_ms", "reask_limit",
      "seed",         "alignment_baseline", "yates",  "cutoff_policy"};
  return keys;
}

inline std::string env_name(std::string_view key) {
  std::string out = "LOSTATSEA_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

/// A raw value and where it came from, for diagnostics.
struct SettingValue {
  std::string value;
  std::string origin;
};

using SettingLayer = std::map<std::string, SettingValue>;

namespace detail {

inline std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool known_key(const std::string& key) {
  const auto& keys = setting_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

template <typename T>
T parse_number(const SettingValue& v, const std::string& key) {
  T out{};
  const auto* first = v.value.data();
  const auto* last = first + v.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (v.value.empty() || ec != std::errc() || ptr != last)
    throw ValidationError(v.origin + ": " + key + ": expected a number, got '" + v.value + "'");
  return out;
}

inline bool parse_bool(const SettingValue& v, const std::string& key) {
  if (v.value == "true" || v.value == "1" || v.value == "yes") return true;
  if (v.value == "false" || v.value == "0" || v.value == "no") return false;
  throw ValidationError(v.origin + ": " + key + ": expected true or false, got '" + v.value + "'");
}

}  // namespace detail

/// Parse "key = value" lines; '#' starts a comment line.
inline SettingLayer parse_config_text(std::string_view text, const std::string& source) {
  SettingLayer out;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = detail::trim_copy(text.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + " line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string key = detail::trim_copy(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim_copy(std::string_view(line).substr(eq + 1));
    if (!detail::known_key(key)) throw ValidationError(where + ": unknown setting '" + key + "'");
    if (out.contains(key)) throw ValidationError(where + ": " + key + ": set twice");
    out[key] = {value, where};
  }
  return out;
}

inline SettingLayer read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SystemError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), "config file '" + path + "'");
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

inline SettingLayer environment_layer(const EnvLookup& env = process_env) {
  SettingLayer out;
  for (const auto& key : setting_keys()) {
    const auto name = env_name(key);
    if (auto v = env(name)) out[key] = {*v, "environment " + name};
  }
  return out;
}

/// Merge layers (flags > environment > file > defaults) into typed settings.
inline Settings load_config(const std::optional<std::string>& path, const SettingLayer& flags,
                            const EnvLookup& env = process_env) {
  SettingLayer merged = path ? read_config_file(*path) : SettingLayer{};
  for (auto& [k, v] : environment_layer(env)) merged[k] = v;
  for (const auto& [k, v] : flags) {
    if (!detail::known_key(k)) throw ValidationError("unknown setting '" + k + "'");
    merged[k] = v;
  }

  Settings s;
  auto& p = s.provider;
  for (const auto& [key, v] : merged) {
    using detail::parse_number;
    if (key == "provider") p.provider = v.value;
    else if (key == "endpoint") p.endpoint = v.value;
    else if (key == "model") p.model = v.value;
    else if (key == "api_key_env") p.api_key_env = v.value;
    else if (key == "temperature") p.temperature = parse_number<double>(v, key);
    else if (key == "max_output_tokens") p.max_output_tokens = parse_number<int>(v, key);
    else if (key == "timeout_ms") p.timeout = std::chrono::milliseconds{parse_number<long long>(v, key)};
    else if (key == "parallelism") p.parallelism = parse_number<int>(v, key);
    else if (key == "max_attempts") p.retry.max_attempts = parse_number<int>(v, key);
    else if (key == "backoff_ms") p.retry.initial_backoff = std::chrono::milliseconds{parse_number<long long>(v, key)};
    else if (key == "backoff_max_ms") p.retry.max_backoff = std::chrono::milliseconds{parse_number<long long>(v, key)};
    else if (key == "reask_limit") p.reask_limit = parse_number<int>(v, key);
    else if (key == "seed") s.seed = parse_number<std::uint64_t>(v, key);
    else if (key == "alignment_baseline") s.alignment_baseline = parse_number<double>(v, key);
    else if (key == "yates") s.yates = detail::parse_bool(v, key);
    else if (key == "cutoff_policy") {
      if (v.value == "seeded_draw") s.cutoff_policy = CutoffTiePolicy::kSeededDraw;
      else if (v.value == "expand") s.cutoff_policy = CutoffTiePolicy::kExpand;
      else throw ValidationError(v.origin + ": cutoff_policy: expected seeded_draw or expand");
    }
  }
  if (!(s.alignment_baseline > 0.0 && s.alignment_baseline < 1.0))
    throw ValidationError("alignment_baseline must lie in (0, 1)");
  p.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Digests and manifest

inline std::string hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += kHex[bytes[i] >> 4];
    out += kHex[bytes[i] & 0xF];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw SystemError("sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view data) {
    if (EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1) throw SystemError("sha256 update failed");
    return *this;
  }
  std::string hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1) throw SystemError("sha256 final failed");
    return hex(md, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline std::string sha256_hex(std::string_view data) { return Sha256().update(data).hex_digest(); }

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SystemError("cannot read '" + path + "'");
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return h.hex_digest();
}

struct RunManifest {
  std::vector<std::string> command_line;
  Json settings = Json::object();
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> cohort_ids;  // group ids touched by the run
  std::vector<std::string> models;      // provider model tokens
  std::string started_at;
  std::string finished_at;

  /// Covers settings, input contents, seeds and the tool version.
  std::string digest() const {
    Json covered = {{"settings", settings}, {"inputs", inputs}, {"seeds", seeds}, {"version", kVersion}};
    return sha256_hex(covered.dump());
  }

  Json to_json() const {
    return {{"command_line", command_line},
            {"settings", settings},
            {"inputs", inputs},
            {"seeds", seeds},
            {"cohort_ids", cohort_ids},
            {"models", models},
            {"versions", {{"lostatsea", kVersion}, {"schema", kSchemaVersion}}},
            {"config_digest", digest()},
            {"started_at", started_at},
            {"finished_at", finished_at}};
  }
};

inline void add_cohort(RunManifest& m, const Cohort& c) {
  for (const auto& g : c.groups) {
    m.cohort_ids.push_back(g.group_id);
    if (g.model && std::find(m.models.begin(), m.models.end(), *g.model) == m.models.end()) m.models.push_back(*g.model);
  }
}

}  // namespace lostatsea
