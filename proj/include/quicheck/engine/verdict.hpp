#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/engine/state.hpp"

namespace quicheck {

enum class VerdictStatus : std::uint8_t { kPass, kViolation };

// Outcome of checking one requirement. Every verdict cites exactly one
// registered requirement id.
struct Verdict {
  std::string requirement;
  VerdictStatus status = VerdictStatus::kViolation;
  Direction direction = Direction::kFromPeer;
  std::uint64_t event_index = 0;
  std::string detail;

  bool violation() const { return status == VerdictStatus::kViolation; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Builds a verdict, asserting the id is in the default registry.
Verdict make_verdict(std::string_view requirement, VerdictStatus status, Direction dir,
                     std::uint64_t event_index, std::string detail);
inline Verdict violation(std::string_view requirement, Direction dir, std::uint64_t event_index,
                         std::string detail) {
  return make_verdict(requirement, VerdictStatus::kViolation, dir, event_index, std::move(detail));
}

// What the test expects the implementation under test to do.
struct ExpectedOutcome {
  enum class Kind : std::uint8_t {
    kCleanClose,               // finishes and closes without error
    kTransportError,           // closes with one of `codes`
    kHandshakeFailureOrError,  // closes with one of `codes`, or never completes the handshake
    kIgnored,                  // proceeds normally
  };
  Kind kind = Kind::kCleanClose;
  // codes[0] is the primary code; the rest are acceptable alternatives.
  std::vector<std::uint64_t> codes;

  bool carries_codes() const {
    return kind == Kind::kTransportError || kind == Kind::kHandshakeFailureOrError;
  }
  friend bool operator==(const ExpectedOutcome&, const ExpectedOutcome&) = default;
};

std::string_view expected_kind_name(ExpectedOutcome::Kind k);
// "clean_close" | "transport_error" | "handshake_failure_or_error" | "ignored".
ExpectedOutcome::Kind parse_expected_kind(std::string_view text);

// End-of-run predicate of a test.
enum class Goal : std::uint8_t {
  kAllDataDelivered,           // every request answered, connection closed cleanly
  kTesterClosed,               // tester closed with NO_ERROR, peer raised nothing
  kInvalidTokenOrNoHandshake,  // is_invalid_token | ~handshake_done
  kStimulusDelivered,          // adversarial stimulus went out
};

std::string_view goal_name(Goal g);
Goal parse_goal(std::string_view text);

}  // namespace quicheck
