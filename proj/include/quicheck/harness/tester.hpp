#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/state.hpp"
#include "quicheck/gen/generator.hpp"
#include "quicheck/gen/mutations.hpp"
#include "quicheck/gen/random.hpp"
#include "quicheck/harness/datagram.hpp"

namespace quicheck {

// Hello parameters both scripted endpoints start from. The server variant
// adds original_destination_connection_id and a reset token.
TransportParameterSet default_transport_params(Role role, const ConnectionId& scid,
                                               const ConnectionId& original_dcid);
// Appends PADDING so the encoded packet is at least `size` bytes.
void pad_to(Packet& p, std::size_t size);

// The generating side of an iteration. It reads the monitor's view of the
// connection (where it is Endpoint::kTester), scripts the mock handshake,
// samples 1-RTT traffic from the test's plan and injects the mutation.
class Tester {
 public:
  Tester(const TestSpec& spec, std::uint64_t seed, bool allow_migration = true);

  std::optional<Datagram> poll(const ConnectionState& state, std::uint64_t now);
  // Datagram from the peer, after the monitor ingested it.
  void on_datagram(const Datagram& d, const std::vector<Packet>& packets);

  // Sent CONNECTION_CLOSE; nothing more will follow.
  bool done() const { return closed_; }
  bool stimulus_sent() const { return stimulus_sent_; }
  Address local_address() const { return local_; }

 private:
  Role role() const { return spec_.tester_role(); }
  Packet header(const ConnectionState& state, PacketType type) const;
  Datagram wrap(std::vector<Packet> packets) const;
  std::optional<Datagram> handshake(const ConnectionState& state);
  std::optional<Datagram> application(const ConnectionState& state);
  bool mutation_due(const ConnectionState& state) const;

  TestSpec spec_;
  Rng rng_;
  const Mutation* mutation_ = nullptr;
  bool allow_migration_;
  SendQueue queue_;
  ConnectionId scid_;
  ConnectionId dcid_;
  ConnectionId original_dcid_;
  Address local_;
  Address remote_;
  std::deque<std::pair<PathData, Address>> challenges_;
  std::set<std::uint64_t> answered_;
  std::uint64_t confirmed_packets_ = 0;
  std::uint64_t stimulus_at_ = 0;
  std::uint64_t migrate_at_ = 0;
  bool cids_learned_ = false;
  bool started_ = false;
  bool flight_sent_ = false;
  bool done_sent_ = false;
  bool requests_queued_ = false;
  bool migrated_ = false;
  bool stimulus_sent_ = false;
  bool closed_ = false;
};

}  // namespace quicheck
