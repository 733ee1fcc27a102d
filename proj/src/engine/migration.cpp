#include <algorithm>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/engine/requirements.hpp"

namespace quicheck {

Address expected_peer_address(const ConnectionState& state, Endpoint sender,
                              MigrationPolicy policy) {
  const auto& pn = state.at(sender).pn;
  if (policy == MigrationPolicy::kAppLevelOnly) {
    const auto& mark = pn[static_cast<std::size_t>(PnSpace::kApplication)].highest_non_probing;
    if (!mark) throw UndefinedAddressError("no non-probing application packet yet");
    return mark->src;
  }
  // Raw packet numbers across spaces; a later space wins a tie.
  const NonProbingMark* best = nullptr;
  for (const auto& ledger : pn) {
    if (ledger.highest_non_probing &&
        (!best || ledger.highest_non_probing->packet_number >= best->packet_number)) {
      best = &*ledger.highest_non_probing;
    }
  }
  if (!best) throw UndefinedAddressError("no non-probing packet yet");
  return best->src;
}

std::vector<Verdict> check_migration(ConnectionState& state, const Packet& pkt, Direction dir,
                                     Address src, Address dst, MigrationPolicy policy) {
  std::vector<Verdict> out;
  const std::uint64_t idx = state.next_event;
  const Endpoint s = sender_of(dir);
  auto& sender = state.at(s);
  auto& receiver = state.at(other(s));
  sender.paths.used.insert(src);
  if (classify_probing_packet(pkt) == Probing::kProbing) return out;

  auto& sources = sender.paths.non_probing_sources;
  if (!sources.empty() && !sources.contains(src)) {
    if (!state.handshake_confirmed(s)) {
      out.push_back(violation(req::kMigBeforeConfirmed, dir, idx,
                              std::string(role_name(sender.role)) + " moved to " +
                                  src.to_string() + " before the handshake was confirmed"));
    }
    if (receiver.handshake.params &&
        receiver.handshake.params->flag(tp::kDisableActiveMigration)) {
      out.push_back(violation(req::kMigDisabled, dir, idx,
                              "moved to " + src.to_string() + " although migration is disabled"));
    }
    ++sender.paths.migrations;
    if (!receiver.paths.validated.contains(src) &&
        std::find(receiver.paths.pending_validation.begin(), receiver.paths.pending_validation.end(),
                  src) == receiver.paths.pending_validation.end()) {
      receiver.paths.pending_validation.push_back(src);
    }
  }
  sources.insert(src);

  try {
    const Address expected = expected_peer_address(state, other(s), policy);
    if (dst != expected) {
      out.push_back(violation(req::kMigAddrTarget, dir, idx,
                              "sent to " + dst.to_string() + ", expected " + expected.to_string() +
                                  " (" + std::string(policy_name(policy)) + ")"));
    }
  } catch (const UndefinedAddressError&) {
  }
  return out;
}

std::vector<Verdict> sweep_pending_checks(ConnectionState& state) {
  std::vector<Verdict> out;
  for (const Endpoint e : {Endpoint::kTester, Endpoint::kPeer}) {
    auto& pending = state.at(e).paths.pending_validation;
    for (const auto& addr : pending) {
      out.push_back(violation(req::kMigNoPathValidation, direction_of(e), state.next_event,
                              "no PATH_CHALLENGE towards " + addr.to_string()));
    }
    pending.clear();
  }
  return out;
}

}  // namespace quicheck
