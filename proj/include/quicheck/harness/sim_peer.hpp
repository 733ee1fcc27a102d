#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/state.hpp"
#include "quicheck/gen/generator.hpp"
#include "quicheck/gen/random.hpp"
#include "quicheck/harness/datagram.hpp"

namespace quicheck {

struct SimPeerConfig {
  bool decreasing_pn = false;         // third 1-RTT packet reuses an older packet number
  bool never_path_challenge = false;  // never validates a migrated peer address
  std::optional<std::uint64_t> wrong_error_code;  // closes with this code instead (INTERNAL_ERROR unless given)
  bool silent_close = false;          // detects errors but never sends CONNECTION_CLOSE
  bool wrong_level_close = false;     // closes in 1-RTT even before confirmation
  bool ignore_unknown_tp = true;

  bool conformant() const;
  // "conformant" or "defect:<Name>", Name one of DecreasingPN,
  // NeverPathChallenge, WrongErrorCode[=<code>], SilentClose,
  // WrongLevelClose, RejectUnknownTP. Throws InputError.
  static SimPeerConfig parse(std::string_view text);
  std::string describe() const;
  friend bool operator==(const SimPeerConfig&, const SimPeerConfig&) = default;
};

// In-process implementation under test. It runs its own monitor over both
// directions and reacts to every violation it sees in the tester's traffic
// with the registry's error code.
class SimPeer {
 public:
  SimPeer(Role role, const SimPeerConfig& config, std::uint64_t seed, const FixedParams& params);

  void receive(const Datagram& d, std::uint64_t now);
  // Next datagram to send, if any.
  std::optional<Datagram> poll(std::uint64_t now);
  bool closed() const { return closed_; }
  const ConnectionState& view() const { return state_; }

 private:
  Endpoint self() const { return Endpoint::kTester; }
  Address self_address() const;
  Address destination() const;
  TransportParameterSet hello_params() const;
  void emit(std::vector<Packet> packets, Address dst, std::uint64_t now);
  Packet header(PacketType type) const;
  std::uint64_t packet_number(PacketType type);
  void close(std::uint64_t code, const std::string& reason, std::uint64_t now);
  void on_handshake(std::uint64_t now);
  void on_app(const std::vector<Packet>& packets, Address src);
  bool send_app(std::uint64_t now);

  Role role_;
  SimPeerConfig config_;
  Rng rng_;
  FixedParams params_;
  ConnectionState state_;
  SendQueue queue_;
  ConnectionId scid_;
  ConnectionId dcid_;
  ConnectionId original_dcid_;
  Address last_peer_address_;
  std::deque<Datagram> outbox_;
  std::deque<std::pair<PathData, Address>> responses_;
  std::set<std::uint64_t> answered_;
  std::set<std::uint64_t> stopped_;
  std::deque<ResetStream> resets_;
  std::uint64_t app_packets_ = 0;
  bool started_ = false;
  bool flight_sent_ = false;
  bool done_sent_ = false;
  bool requests_queued_ = false;
  bool closed_ = false;
  bool draining_ = false;
};

}  // namespace quicheck
