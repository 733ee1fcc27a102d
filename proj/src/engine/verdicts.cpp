#include <algorithm>
#include <stdexcept>
#include <string>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"

namespace quicheck {

Verdict make_verdict(std::string_view requirement, VerdictStatus status, Direction dir,
                     std::uint64_t event_index, std::string detail) {
  if (!default_registry().contains(requirement)) {
    throw std::logic_error("verdict cites unregistered requirement " + std::string(requirement));
  }
  return Verdict{std::string(requirement), status, dir, event_index, std::move(detail)};
}

std::string_view expected_kind_name(ExpectedOutcome::Kind k) {
  switch (k) {
    case ExpectedOutcome::Kind::kCleanClose: return "clean_close";
    case ExpectedOutcome::Kind::kTransportError: return "transport_error";
    case ExpectedOutcome::Kind::kHandshakeFailureOrError: return "handshake_failure_or_error";
    case ExpectedOutcome::Kind::kIgnored: return "ignored";
  }
  return "?";
}

ExpectedOutcome::Kind parse_expected_kind(std::string_view text) {
  for (auto k : {ExpectedOutcome::Kind::kCleanClose, ExpectedOutcome::Kind::kTransportError,
                 ExpectedOutcome::Kind::kHandshakeFailureOrError, ExpectedOutcome::Kind::kIgnored}) {
    if (expected_kind_name(k) == text) return k;
  }
  throw InputError("unknown expected outcome '" + std::string(text) + "'");
}

std::string_view goal_name(Goal g) {
  switch (g) {
    case Goal::kAllDataDelivered: return "all_data_delivered";
    case Goal::kTesterClosed: return "tester_closed";
    case Goal::kInvalidTokenOrNoHandshake: return "invalid_token_or_no_handshake";
    case Goal::kStimulusDelivered: return "stimulus_delivered";
  }
  return "?";
}

Goal parse_goal(std::string_view text) {
  for (auto g : {Goal::kAllDataDelivered, Goal::kTesterClosed, Goal::kInvalidTokenOrNoHandshake,
                 Goal::kStimulusDelivered}) {
    if (goal_name(g) == text) return g;
  }
  throw InputError("unknown goal '" + std::string(text) + "'");
}

ObservedReaction observe_reaction(const ConnectionState& state, bool silent) {
  return ObservedReaction{state.peer().close, silent, state.handshake_complete()};
}

namespace {

bool error_close(const CloseInfo& c) {
  return c.application || c.error_code != error_code::kNoError;
}

std::string describe(const CloseInfo& c) {
  return (c.application ? "application error " + std::to_string(c.error_code)
                        : error_code_name(c.error_code)) +
         " in " + std::string(packet_type_name(c.packet_type)) + " packet";
}

}  // namespace

Verdict check_error_response(const ConnectionState& state, const ObservedReaction& observed,
                             const ExpectedOutcome& expected) {
  const Direction dir = Direction::kFromPeer;
  const std::uint64_t idx = observed.close ? observed.close->event_index : state.next_event;
  auto pass = [&](std::string_view id, std::string detail) {
    return make_verdict(id, VerdictStatus::kPass, dir, idx, std::move(detail));
  };
  auto fail = [&](std::string_view id, std::string detail) {
    return make_verdict(id, VerdictStatus::kViolation, dir, idx, std::move(detail));
  };

  if (!expected.carries_codes()) {
    if (observed.close && error_close(*observed.close)) {
      return fail(req::kErrUnexpectedClose, "closed with " + describe(*observed.close));
    }
    return pass(req::kErrUnexpectedClose, "no error close");
  }

  // A NO_ERROR close counts as carrying on.
  if (observed.close && error_close(*observed.close)) {
    const auto& c = *observed.close;
    if (!c.level_legal) {
      return fail(req::kErrWrongLevel, describe(c) + " before the handshake was confirmed");
    }
    const auto it = std::find(expected.codes.begin(), expected.codes.end(), c.error_code);
    if (!c.application && it != expected.codes.end()) {
      return pass(req::kErrCodeExpected,
                  describe(c) + (it == expected.codes.begin() ? " (primary)" : " (alternative)"));
    }
    return fail(req::kErrCodeExpected, describe(c) + ", expected " +
                                           error_code_name(expected.codes.front()));
  }
  if (expected.kind == ExpectedOutcome::Kind::kHandshakeFailureOrError &&
      !observed.handshake_completed) {
    return pass(req::kErrCodeExpected, "handshake never completed");
  }
  if (observed.silent && !observed.close) {
    return fail(req::kErrSilent, "stopped sending without CONNECTION_CLOSE");
  }
  return fail(req::kErrNoReaction, "kept going after the stimulus");
}

Verdict finalize_check(const ConnectionState& state, Goal goal) {
  bool ok = false;
  std::string detail;
  switch (goal) {
    case Goal::kAllDataDelivered: {
      const auto done = completed_request_streams(state);
      bool clean = false;
      bool errored = false;
      for (const auto& e : state.endpoints) {
        if (!e.close) continue;
        (error_close(*e.close) ? errored : clean) = true;
      }
      ok = done >= state.goal_requests && clean && !errored;
      detail = std::to_string(done) + "/" + std::to_string(state.goal_requests) +
               " requests answered" + (clean && !errored ? ", closed cleanly" : ", no clean close");
      break;
    }
    case Goal::kTesterClosed: {
      const auto& t = state.tester().close;
      const auto& p = state.peer().close;
      ok = t && !error_close(*t) && (!p || !error_close(*p));
      detail = ok ? "tester closed cleanly" : "tester did not close cleanly";
      break;
    }
    case Goal::kInvalidTokenOrNoHandshake:
      ok = state.is_invalid_token || !state.handshake_complete();
      detail = state.is_invalid_token ? "token rejected"
               : ok                   ? "handshake never completed"
                                      : "handshake completed with an invalid token";
      break;
    case Goal::kStimulusDelivered:
      ok = state.stimulus_event.has_value();
      detail = ok ? "stimulus delivered" : "stimulus never sent";
      break;
  }
  return make_verdict(req::kFinalizeGoal, ok ? VerdictStatus::kPass : VerdictStatus::kViolation,
                      Direction::kFromPeer, state.next_event,
                      std::string(goal_name(goal)) + ": " + detail);
}

}  // namespace quicheck
