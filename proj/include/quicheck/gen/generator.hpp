#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>

#include "quicheck/engine/state.hpp"
#include "quicheck/gen/plan.hpp"
#include "quicheck/gen/random.hpp"
#include "quicheck/wire/packet.hpp"

namespace quicheck {

// Outgoing stream data of one endpoint.
struct StreamOutbox {
  Bytes data;
  std::uint64_t sent = 0;
  bool fin_sent = false;
  bool reset = false;
  bool pending() const { return !reset && !fin_sent; }
};

// Data an endpoint still has to send, shared between the scripted handshake
// and the sampled application phase.
struct SendQueue {
  std::array<Bytes, kPnSpaceCount> crypto{};  // not yet sent, per space
  std::array<std::uint64_t, kPnSpaceCount> crypto_offset{};
  std::map<std::uint64_t, StreamOutbox> streams;
  std::set<std::uint64_t> stop_sent;  // streams we sent STOP_SENDING for

  bool has_crypto(PnSpace s) const { return !crypto[static_cast<std::size_t>(s)].empty(); }
  void push_crypto(PnSpace s, const Bytes& data);
  void add_stream(std::uint64_t stream_id, Bytes data);
};

struct HeaderTemplate {
  ConnectionId dcid;
  ConnectionId scid;
  Bytes token;
  std::uint32_t version = kDraft29Version;
};

// Everything the generator may read. `state` is the monitor's view; `self`
// names the generating endpoint in it.
struct GenContext {
  const ConnectionState& state;
  Endpoint self = Endpoint::kTester;
  PacketType type = PacketType::kOneRtt;
  SendQueue* queue = nullptr;

  const EndpointState& me() const { return state.at(self); }
  const EndpointState& them() const { return state.at(other(self)); }
};

// Kinds that can currently be generated without violating a requirement.
bool kind_legal(FrameKind k, const GenContext& ctx);

// Draws a kind with probability weight / (sum over currently legal kinds).
// Throws ExhaustionError when nothing is legal.
FrameKind sample_frame_kind(const GenerationPlan& plan, Rng& rng, const GenContext& ctx);

// Draws a frame of kind `k` from the state-legal domain, at most `budget`
// bytes when encoded. Throws ExhaustionError after `max_retries` failures.
Frame synthesize_frame(FrameKind k, const GenContext& ctx, Rng& rng, std::size_t budget,
                       std::size_t max_retries = 64);

// Builds the next packet of `ctx.type`. Handshake-level packets carry the
// queued CRYPTO data plus an ACK when owed; 1-RTT packets carry 1..max_frames
// sampled frames. Consumes queued data. Throws ExhaustionError rather than
// return an empty packet.
Packet build_packet(const GenContext& ctx, const GenerationPlan& plan, Rng& rng,
                    const HeaderTemplate& header);

// Marks the data carried by `f` as sent.
void note_sent(SendQueue& q, const Frame& f, PacketType type);

// ACK covering everything the other endpoint sent in `space`; nullopt when
// nothing was received.
std::optional<Ack> ack_for(const ConnectionState& state, Endpoint self, PnSpace space,
                           std::uint64_t delay = 0);

// Next packet number `self` uses in `space`.
std::uint64_t next_packet_number(const ConnectionState& state, Endpoint self, PnSpace space);

}  // namespace quicheck
