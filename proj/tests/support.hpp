#pragma once

#include <cstdint>
#include <vector>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/gen/random.hpp"
#include "quicheck/harness/trace.hpp"
#include "quicheck/wire/frame.hpp"
#include "quicheck/wire/packet.hpp"

namespace quicheck::support {

inline constexpr Address kClientAddr{kLoopback, 4987};
inline constexpr Address kServerAddr{kLoopback, 4443};
inline constexpr Address kMigratedAddr{kLoopback, 4988};

// Arbitrary frames and packets, drawn without the gen module so the codec
// is checked against something it did not produce itself.
Frame random_frame(Rng& rng);
Packet random_packet(Rng& rng);

// Hand-scripted mock handshake: hello with transport parameters, server
// flight, client Finished, HANDSHAKE_DONE. Both endpoints use 8-byte CIDs.
struct Script {
  Role tester_role = Role::kClient;
  ConnectionId client_cid;
  ConnectionId server_cid;
  std::vector<TraceRecord> records;
  std::uint64_t now = 0;
  std::array<std::uint64_t, 2 * kPnSpaceCount> next_pn{};

  explicit Script(Role tester_role);
  Address address_of(Endpoint e) const;
  // Appends one datagram built from `packets`; packet numbers are assigned.
  void send(Endpoint from, std::vector<Packet> packets, std::optional<Address> src = {},
            std::optional<Address> dst = {});
  Packet packet(Endpoint from, PacketType type, std::vector<Frame> frames) const;
  void handshake(const TransportParameterSet& client_params,
                 const TransportParameterSet& server_params);
  void handshake();
};

// Feeds records into a fresh state and collects every verdict.
struct Replayed {
  ConnectionState state;
  std::vector<Verdict> verdicts;
};
Replayed replay(const std::vector<TraceRecord>& records, Role tester_role,
                MigrationPolicy policy = MigrationPolicy::kAppLevelOnly);

// Trace reproducing the packet-number ambiguity: the client's highest raw
// packet number is a Handshake packet from its first address, while its
// highest application packet comes from the address it migrated to. The
// server then answers on the new address.
std::vector<TraceRecord> migration_ambiguity_records();

std::vector<std::string> violated_ids(const std::vector<Verdict>& vs);

}  // namespace quicheck::support
