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

// Shared vocabulary: error types, identifiers, enumerations and seed helpers.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

namespace lostatsea {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or a violated invariant. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Provider, transport or filesystem failure. The CLI maps this to exit code 2.
class SystemError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kGroupSize = 4;
inline constexpr double kMinNomination = 0.0;
inline constexpr double kMaxNomination = 10.0;

/// Opaque participant token, unique within a cohort.
class ParticipantId {
 public:
  ParticipantId() = default;
  explicit ParticipantId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw ValidationError("participant id must be non-empty");
  }

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const ParticipantId&, const ParticipantId&) = default;
  friend auto operator<=>(const ParticipantId&, const ParticipantId&) = default;

 private:
  std::string value_;
};

inline std::vector<ParticipantId> make_ids(std::initializer_list<std::string_view> names) {
  std::vector<ParticipantId> ids;
  ids.reserve(names.size());
  for (auto n : names) ids.emplace_back(std::string(n));
  return ids;
}

enum class GenderCategory { kMale, kNonMale };
enum class Treatment { kIdentified, kPseudonymous, kNoDemographics };
enum class Origin { kHuman, kAgent, kSynthetic };
enum class StageId { kProfile, kDiscussion, kSelfNomination, kElectionBallot, kTask };

inline constexpr std::array<StageId, 5> kStageOrder = {
    StageId::kProfile, StageId::kDiscussion, StageId::kSelfNomination,
    StageId::kElectionBallot, StageId::kTask};

inline std::size_t stage_index(StageId s) noexcept { return static_cast<std::size_t>(s); }

inline std::string_view to_string(GenderCategory g) noexcept {
  return g == GenderCategory::kMale ? "male" : "non_male";
}

inline std::string_view to_string(Treatment t) noexcept {
  switch (t) {
    case Treatment::kIdentified: return "identified";
    case Treatment::kPseudonymous: return "pseudonymous";
    case Treatment::kNoDemographics: return "no_demographics";
  }
  return "?";
}

inline std::string_view to_string(Origin o) noexcept {
  switch (o) {
    case Origin::kHuman: return "human";
    case Origin::kAgent: return "agent";
    case Origin::kSynthetic: return "synthetic";
  }
  return "?";
}

inline std::string_view to_string(StageId s) noexcept {
  switch (s) {
    case StageId::kProfile: return "PROFILE";
    case StageId::kDiscussion: return "DISCUSSION";
    case StageId::kSelfNomination: return "SELF_NOMINATION";
    case StageId::kElectionBallot: return "ELECTION_BALLOT";
    case StageId::kTask: return "TASK";
  }
  return "?";
}

inline Treatment parse_treatment(std::string_view s) {
  if (s == "identified") return Treatment::kIdentified;
  if (s == "pseudonymous") return Treatment::kPseudonymous;
  if (s == "no_demographics") return Treatment::kNoDemographics;
  throw ValidationError("unknown treatment '" + std::string(s) +
                        "' (expected identified | pseudonymous | no_demographics)");
}

inline Origin parse_origin(std::string_view s) {
  if (s == "human") return Origin::kHuman;
  if (s == "agent") return Origin::kAgent;
  if (s == "synthetic") return Origin::kSynthetic;
  throw ValidationError("unknown origin '" + std::string(s) + "' (expected human | agent | synthetic)");
}

inline StageId parse_stage(std::string_view s) {
  for (auto stage : kStageOrder)
    if (to_string(stage) == s) return stage;
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

/// Treatments whose members are shown to each other under animal aliases.
inline bool uses_pseudonyms(Treatment t) noexcept { return t != Treatment::kIdentified; }

// ---------------------------------------------------------------------------
// Seeds

/// FNV-1a over bytes; stable across platforms.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for a named purpose; independent of call order.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) noexcept {
  return splitmix64(base ^ fnv1a(tag));
}

using Engine = std::mt19937_64;

inline std::size_t uniform_index(Engine& engine, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine);
}

/// Fisher-Yates with a portable index distribution.
template <typename T>
void seeded_shuffle(std::vector<T>& items, Engine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(engine, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace lostatsea

template <>
struct std::hash<lostatsea::ParticipantId> {
  std::size_t operator()(const lostatsea::ParticipantId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
