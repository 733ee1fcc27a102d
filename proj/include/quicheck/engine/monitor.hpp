#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quicheck/engine/state.hpp"
#include "quicheck/engine/verdict.hpp"
#include "quicheck/wire/packet.hpp"

namespace quicheck {

enum class EventKind : std::uint8_t {
  kDatagramReceived,
  kDatagramSent,
  kPacket,
  kFrame,
  kTimeout,
  kClose,
};

std::string_view event_kind_name(EventKind k);

struct ProtocolEvent {
  EventKind kind = EventKind::kPacket;
  Direction direction = Direction::kFromTester;
  std::uint64_t index = 0;
  std::uint64_t timestamp_ms = 0;
  Address src;
  Address dst;
  std::optional<Packet> packet;
  std::optional<Frame> frame;
};

// Where a frame came from, handed to frame_event.
struct PacketContext {
  Direction direction = Direction::kFromTester;
  PacketType type = PacketType::kOneRtt;
  std::uint64_t packet_number = 0;
  Address src;
  Address dst;
  std::uint64_t event_index = 0;
};

struct IngestResult {
  std::vector<ProtocolEvent> events;
  std::vector<Verdict> verdicts;
  std::vector<Packet> packets;
  bool decoded = true;
};

class UndefinedAddressError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decodes a datagram and runs every applicable check in order: per packet
// packet_event, check_migration, then frame_event per frame. Undecodable
// bytes yield one CODEC_FAILURE verdict and leave the state untouched.
IngestResult ingest_datagram(ConnectionState& state, Direction dir, Address src, Address dst,
                             ByteSpan bytes, std::uint64_t now_ms);

// Packet-level checks and packet-number bookkeeping. Never touches flow
// control, handshake, CID or path ledgers.
std::vector<Verdict> packet_event(ConnectionState& state, const Packet& pkt, Direction dir,
                                  Address src, Address dst,
                                  const std::vector<std::string>& annotations = {});

// Frame-level checks. Never touches packet-number bookkeeping.
std::vector<Verdict> frame_event(ConnectionState& state, const Frame& frame,
                                 const PacketContext& ctx);

enum class Probing : std::uint8_t { kProbing, kNonProbing };
Probing classify_probing(const Frame& frame);
Probing classify_probing_packet(const Packet& pkt);

// Address `sender` should be reached at: the source of its highest-numbered
// non-probing packet under `policy`. Throws UndefinedAddressError when the
// sender has no non-probing packet yet.
Address expected_peer_address(const ConnectionState& state, Endpoint sender,
                              MigrationPolicy policy);

std::vector<Verdict> check_migration(ConnectionState& state, const Packet& pkt, Direction dir,
                                     Address src, Address dst, MigrationPolicy policy);

// Pure: judges one transport parameter set sent in direction `dir`.
std::vector<Verdict> check_transport_params(const ConnectionState& state,
                                            const TransportParameterSet& set, Direction dir,
                                            std::uint64_t event_index = 0);

// End-of-iteration path-validation sweep: every address a peer migrated to
// that never received a PATH_CHALLENGE yields MIG_NO_PATH_VALIDATION.
std::vector<Verdict> sweep_pending_checks(ConnectionState& state);

struct ObservedReaction {
  std::optional<CloseInfo> close;  // CONNECTION_CLOSE sent by the implementation under test
  bool silent = false;             // no datagram for the reaction window after the stimulus
  bool handshake_completed = false;
};

ObservedReaction observe_reaction(const ConnectionState& state, bool silent);

// Classifies the reaction as correct code / wrong code / wrong level /
// silent / no reaction and passes iff it matches `expected`.
Verdict check_error_response(const ConnectionState& state, const ObservedReaction& observed,
                             const ExpectedOutcome& expected);

Verdict finalize_check(const ConnectionState& state, Goal goal);

}  // namespace quicheck
