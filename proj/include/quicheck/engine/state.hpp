#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "quicheck/engine/address.hpp"
#include "quicheck/wire/frame.hpp"
#include "quicheck/wire/handshake_messages.hpp"
#include "quicheck/wire/packet.hpp"
#include "quicheck/wire/transport_params.hpp"

namespace quicheck {

enum class Role : std::uint8_t { kClient, kServer };
enum class Direction : std::uint8_t { kFromTester, kFromPeer };
enum class Endpoint : std::uint8_t { kTester = 0, kPeer = 1 };

std::string_view role_name(Role r);
std::string_view direction_name(Direction d);
// "client" / "server"; throws InputError otherwise.
Role parse_role(std::string_view text);
inline Role opposite(Role r) { return r == Role::kClient ? Role::kServer : Role::kClient; }
inline Endpoint sender_of(Direction d) {
  return d == Direction::kFromTester ? Endpoint::kTester : Endpoint::kPeer;
}
inline Endpoint other(Endpoint e) {
  return e == Endpoint::kTester ? Endpoint::kPeer : Endpoint::kTester;
}
inline Direction direction_of(Endpoint e) {
  return e == Endpoint::kTester ? Direction::kFromTester : Direction::kFromPeer;
}

// Which packets count when looking for "the highest-numbered non-probing
// packet" that decides where to send.
enum class MigrationPolicy : std::uint8_t {
  // Raw packet numbers compared across all spaces; ties resolved in space
  // order initial < handshake < application.
  kAllLevels,
  // Application space only.
  kAppLevelOnly,
};

std::string_view policy_name(MigrationPolicy p);
// "all-levels" / "app-level"; throws InputError.
MigrationPolicy parse_policy(std::string_view text);

// Stream id helpers.
inline bool is_client_initiated(std::uint64_t stream_id) { return (stream_id & 0x1) == 0; }
inline bool is_bidi(std::uint64_t stream_id) { return (stream_id & 0x2) == 0; }
inline std::uint64_t stream_index(std::uint64_t stream_id) { return stream_id >> 2; }
inline Role initiator_of(std::uint64_t stream_id) {
  return is_client_initiated(stream_id) ? Role::kClient : Role::kServer;
}

struct SentPacketInfo {
  PacketType type = PacketType::kOneRtt;
  bool ack_eliciting = false;
  bool ack_only = false;
  bool probing = false;
  Address src;
  Address dst;
  friend bool operator==(const SentPacketInfo&, const SentPacketInfo&) = default;
};

struct NonProbingMark {
  std::uint64_t packet_number = 0;
  Address src;
  friend bool operator==(const NonProbingMark&, const NonProbingMark&) = default;
};

// Packet-number bookkeeping of one sender in one space. Only packet_event
// writes it.
struct PnLedger {
  std::optional<std::uint64_t> largest_sent;
  std::map<std::uint64_t, SentPacketInfo> sent;
  std::optional<NonProbingMark> highest_non_probing;
  // Packets received from the other endpoint since this endpoint last sent
  // an ACK in this space.
  std::uint64_t unacked_eliciting = 0;
  std::uint64_t unacked_non_eliciting = 0;
  friend bool operator==(const PnLedger&, const PnLedger&) = default;
};

// Data the *other* endpoint sent on one stream, seen by this receiver.
struct StreamReceive {
  std::uint64_t highest_offset = 0;
  std::optional<std::uint64_t> final_size;
  bool reset = false;
  friend bool operator==(const StreamReceive&, const StreamReceive&) = default;
};

// Limits this endpoint advertised and what the other endpoint consumed.
// Only frame_event writes it.
struct FlowLedger {
  bool params_known = false;
  std::uint64_t max_data = 0;
  std::uint64_t max_streams_bidi = 0;
  std::uint64_t max_streams_uni = 0;
  std::uint64_t initial_stream_data_bidi_local = 0;
  std::uint64_t initial_stream_data_bidi_remote = 0;
  std::uint64_t initial_stream_data_uni = 0;
  std::map<std::uint64_t, std::uint64_t> stream_limit;  // MAX_STREAM_DATA overrides
  std::map<std::uint64_t, StreamReceive> streams;       // streams the other endpoint sends on
  std::uint64_t consumed = 0;                           // sum of highest offsets
  // Number of streams per type the other endpoint opened (highest index + 1).
  std::uint64_t opened_bidi = 0;
  std::uint64_t opened_uni = 0;
  friend bool operator==(const FlowLedger&, const FlowLedger&) = default;
};

struct HandshakeLedger {
  bool hello_sent = false;
  bool finished_sent = false;
  bool handshake_done_sent = false;
  std::optional<TransportParameterSet> params;
  std::array<CryptoStream, kPnSpaceCount> crypto{};
  friend bool operator==(const HandshakeLedger&, const HandshakeLedger&) = default;
};

// Connection IDs this endpoint issued to the other.
struct CidLedger {
  std::map<std::uint64_t, ConnectionId> issued;
  std::set<std::uint64_t> retired;  // by RETIRE_CONNECTION_ID from the other
  std::uint64_t retire_prior_to = 0;
  std::optional<std::uint64_t> highest_sequence;
  std::size_t active_count() const;
  friend bool operator==(const CidLedger&, const CidLedger&) = default;
};

struct PathLedger {
  std::set<Address> used;                 // every source address seen
  std::set<Address> non_probing_sources;  // addresses non-probing packets came from
  std::map<PathData, Address> challenges_sent;  // data -> destination
  std::set<Address> validated;            // other endpoint's addresses we validated
  std::vector<Address> pending_validation;  // other migrated here, no challenge yet
  std::uint64_t migrations = 0;           // times this endpoint migrated
  friend bool operator==(const PathLedger&, const PathLedger&) = default;
};

struct CloseInfo {
  bool application = false;
  std::uint64_t error_code = 0;
  std::uint64_t frame_type = 0;
  PacketType packet_type = PacketType::kOneRtt;
  // False when sent in a 1-RTT packet before the sender confirmed the
  // handshake.
  bool level_legal = true;
  std::uint64_t event_index = 0;
  std::uint64_t timestamp_ms = 0;
  friend bool operator==(const CloseInfo&, const CloseInfo&) = default;
};

struct EndpointState {
  Role role = Role::kClient;
  std::array<PnLedger, kPnSpaceCount> pn{};
  FlowLedger flow;
  HandshakeLedger handshake;
  CidLedger cids;
  PathLedger paths;
  std::optional<CloseInfo> close;
  std::vector<Bytes> tokens_received;  // client: from NEW_TOKEN
  bool sent_initial_token = false;     // client: non-empty token sent
  friend bool operator==(const EndpointState&, const EndpointState&) = default;
};

// Monitor state of one connection, observing both directions.
struct ConnectionState {
  ConnectionState() = default;
  ConnectionState(Role tester_role, MigrationPolicy policy, std::uint64_t tag = 0);

  Role tester_role = Role::kClient;
  MigrationPolicy policy = MigrationPolicy::kAppLevelOnly;
  std::uint64_t tag = 0;  // iteration identity
  std::uint64_t next_event = 0;
  std::uint64_t now_ms = 0;
  std::size_t short_dcid_length = 8;
  std::array<EndpointState, 2> endpoints{};
  bool is_invalid_token = false;
  std::optional<std::uint64_t> stimulus_event;
  std::uint64_t goal_requests = 10;

  EndpointState& at(Endpoint e) { return endpoints[static_cast<std::size_t>(e)]; }
  const EndpointState& at(Endpoint e) const { return endpoints[static_cast<std::size_t>(e)]; }
  EndpointState& tester() { return at(Endpoint::kTester); }
  EndpointState& peer() { return at(Endpoint::kPeer); }
  const EndpointState& tester() const { return at(Endpoint::kTester); }
  const EndpointState& peer() const { return at(Endpoint::kPeer); }
  const EndpointState& client() const;
  const EndpointState& server() const;
  Endpoint endpoint_of(Role r) const {
    return r == tester_role ? Endpoint::kTester : Endpoint::kPeer;
  }

  // Both Finished messages exchanged.
  bool handshake_complete() const;
  // Client: HANDSHAKE_DONE received. Server: handshake complete.
  bool handshake_confirmed(Endpoint e) const;

  friend bool operator==(const ConnectionState&, const ConnectionState&) = default;
};

// Limit the receiver enforces for data `sender_role` sends on `stream_id`.
std::uint64_t stream_data_limit(const EndpointState& receiver, std::uint64_t stream_id);
// Applies a transport parameter set to the advertised limits of `owner`.
void apply_transport_params(EndpointState& owner, const TransportParameterSet& set);
// Number of streams initiated by the client whose response direction
// (server to client) finished or was reset.
std::uint64_t completed_request_streams(const ConnectionState& state);

}  // namespace quicheck
