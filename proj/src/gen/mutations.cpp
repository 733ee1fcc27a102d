#include "quicheck/gen/mutations.hpp"

#include <algorithm>

#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/handshake_messages.hpp"
#include "quicheck/wire/transport_params.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

namespace {

constexpr std::uint64_t kMaxStreamCount = std::uint64_t{1} << 60;

Mutation hello(std::string id, std::string_view target, std::string text,
               std::optional<Role> only = std::nullopt) {
  return Mutation{std::move(id), std::string(target), MutationScope::kHello,
                  only.value_or(Role::kClient), !only.has_value(), std::move(text)};
}

Mutation frame(std::string id, std::string_view target, std::string text,
               std::optional<Role> only = std::nullopt) {
  return Mutation{std::move(id), std::string(target), MutationScope::kFrame,
                  only.value_or(Role::kClient), !only.has_value(), std::move(text)};
}

std::uint64_t cid_limit(const EndpointState& e) {
  if (!e.handshake.params) return 2;
  try {
    return e.handshake.params->integer(tp::kActiveConnectionIdLimit).value_or(2);
  } catch (const CodecError&) {
    return 2;
  }
}

// Rewrites the transport parameters inside the hello (client) or
// EncryptedExtensions (server) carried by `pkt`.
template <typename Edit>
std::optional<Packet> edit_hello(const Packet& pkt, Role sender, Edit edit) {
  const auto want = sender == Role::kClient ? HandshakeMessageType::kClientHello
                                            : HandshakeMessageType::kEncryptedExtensions;
  const auto want_type = sender == Role::kClient ? PacketType::kInitial : PacketType::kHandshake;
  if (pkt.type != want_type) return std::nullopt;
  Packet out = pkt;
  for (auto& f : out.frames) {
    auto* c = std::get_if<Crypto>(&f);
    if (!c || c->offset != 0) continue;
    auto parsed = parse_handshake_messages(c->data);
    auto it = std::find_if(parsed.messages.begin(), parsed.messages.end(),
                           [&](const HandshakeMessage& m) { return m.type == want; });
    if (it == parsed.messages.end()) continue;
    auto set = decode_transport_params(it->body);
    if (!edit(set)) return std::nullopt;
    it->body = encode_transport_params(set);
    Bytes data = encode_handshake_messages(parsed.messages);
    data.insert(data.end(), c->data.begin() + static_cast<std::ptrdiff_t>(parsed.consumed),
                c->data.end());
    c->data = std::move(data);
    return out;
  }
  return std::nullopt;
}

NewConnectionId fresh_cid(const EndpointState& me, std::uint64_t seq, Rng& rng) {
  NewConnectionId f;
  f.sequence = seq;
  f.retire_prior_to = me.cids.retire_prior_to;
  f.cid = ConnectionId(rng.bytes(8));
  f.reset_token = rng.array<16>();
  return f;
}

}  // namespace

const std::vector<Mutation>& mutation_table() {
  static const std::vector<Mutation> table = {
      frame("UnknownFrame", req::kUnknownFrame,
            "appends a frame with an unassigned type code and a length-prefixed body"),
      hello("DuplicateTransportParam", req::kTpDup,
            "lists ack_delay_exponent twice with the same value"),
      hello("InvalidAckDelayExponent", req::kTpInvalidValue, "sets ack_delay_exponent to 21"),
      hello("InvalidActiveCidLimit", req::kTpInvalidValue, "sets active_connection_id_limit to 1"),
      hello("OmitInitialSourceCid", req::kTpMissingIcid, "drops initial_source_connection_id"),
      hello("OmitOriginalDestCid", req::kTpMissingOcid,
            "drops original_destination_connection_id", Role::kServer),
      hello("PreferredAddressZeroCid", req::kTpPrefaddCid,
            "advertises a preferred_address with a zero-length connection ID", Role::kServer),
      Mutation{"NonzeroInitialToken", std::string(req::kInitialToken), MutationScope::kInitialPacket,
               Role::kClient, false, "puts a token the server never issued in the Initial"},
      frame("ClientNewToken", req::kRoleIllegalFrame, "client sends NEW_TOKEN", Role::kClient),
      frame("ClientHandshakeDone", req::kRoleIllegalFrame, "client sends HANDSHAKE_DONE",
            Role::kClient),
      frame("ExceedCidLimit", req::kNcidLimit,
            "issues one connection ID more than active_connection_id_limit allows"),
      frame("StreamIdBeyondLimit", req::kStreamIdLimit,
            "opens the first bidirectional stream above the peer's stream limit"),
      frame("StreamsBlockedOverflow", req::kStreamsBlockedRange,
            "STREAMS_BLOCKED with a limit above 2^60"),
      frame("RetireUnknownSequence", req::kRcidUnknownSeq,
            "retires a connection ID sequence number the peer never issued"),
      frame("StreamOffsetBeyondLimit", req::kFlowControl,
            "sends one byte past the stream flow-control limit on a fresh stream"),
      frame("NewCidZeroLength", req::kNcidLen, "NEW_CONNECTION_ID with a zero-length CID"),
      frame("NewCidRetireGreater", req::kNcidRtp,
            "NEW_CONNECTION_ID with retire_prior_to above its sequence number"),
      frame("MaxStreamsOverflow", req::kMaxStreamsRange, "MAX_STREAMS with a value above 2^60"),
      frame("ZeroLengthNewToken", req::kNewTokenEmpty, "NEW_TOKEN with an empty token",
            Role::kServer),
  };
  return table;
}

const Mutation* find_mutation(std::string_view id) {
  for (const auto& m : mutation_table()) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::optional<Packet> apply_mutation(const Mutation& m, const Packet& pkt, Rng& rng,
                                     const ConnectionState& state) {
  const auto& me = state.tester();
  const auto& them = state.peer();
  if (!m.any_sender && m.sender != me.role) return std::nullopt;

  if (m.scope == MutationScope::kHello) {
    const std::string& id = m.id;
    return edit_hello(pkt, me.role, [&](TransportParameterSet& set) {
      if (id == "DuplicateTransportParam") {
        std::uint64_t v = 3;
        if (auto cur = set.integer(tp::kAckDelayExponent)) {
          v = *cur;
        } else {
          set.set_integer(tp::kAckDelayExponent, v);
        }
        set.append(tp::kAckDelayExponent, encode_varint(v));
      } else if (id == "InvalidAckDelayExponent") {
        set.set_integer(tp::kAckDelayExponent, 21);
      } else if (id == "InvalidActiveCidLimit") {
        set.set_integer(tp::kActiveConnectionIdLimit, 1);
      } else if (id == "OmitInitialSourceCid") {
        if (!set.has(tp::kInitialSourceConnectionId)) return false;
        set.erase(tp::kInitialSourceConnectionId);
      } else if (id == "OmitOriginalDestCid") {
        if (!set.has(tp::kOriginalDestinationConnectionId)) return false;
        set.erase(tp::kOriginalDestinationConnectionId);
      } else if (id == "PreferredAddressZeroCid") {
        PreferredAddress pa;
        pa.ipv4 = {127, 0, 0, 1};
        pa.ipv4_port = static_cast<std::uint16_t>(rng.uniform(1024, 65535));
        pa.reset_token = rng.array<16>();
        set.set_bytes(tp::kPreferredAddress, encode_preferred_address(pa));
      } else {
        return false;
      }
      return true;
    });
  }

  if (m.scope == MutationScope::kInitialPacket) {
    if (pkt.type != PacketType::kInitial) return std::nullopt;
    Packet out = pkt;
    out.token = rng.bytes(rng.uniform(8, 16));
    return out;
  }

  if (pkt.type != PacketType::kOneRtt) return std::nullopt;
  Packet out = pkt;
  auto& frames = out.frames;
  const std::uint64_t next_seq = me.cids.highest_sequence.value_or(0) + 1;
  const std::uint64_t role_bit = me.role == Role::kServer ? 1 : 0;

  if (m.id == "UnknownFrame") {
    frames.push_back(UnknownFrame{rng.uniform(0x1f, 0x3f), rng.bytes(rng.uniform(0, 16))});
  } else if (m.id == "ClientNewToken") {
    frames.push_back(NewToken{rng.bytes(rng.uniform(8, 32))});
  } else if (m.id == "ClientHandshakeDone") {
    frames.push_back(HandshakeDone{});
  } else if (m.id == "ExceedCidLimit") {
    const auto limit = cid_limit(them);
    const auto active = me.cids.active_count();
    if (active > limit) return std::nullopt;
    for (std::uint64_t i = 0; i <= limit - active; ++i) {
      frames.push_back(fresh_cid(me, next_seq + i, rng));
    }
  } else if (m.id == "StreamIdBeyondLimit") {
    const auto id = 4 * them.flow.max_streams_bidi + role_bit;
    const bool room = stream_data_limit(them, id) > 0 && them.flow.max_data > them.flow.consumed;
    frames.push_back(Stream{id, 0, false, room ? rng.bytes(1) : Bytes{}});
  } else if (m.id == "StreamsBlockedOverflow") {
    frames.push_back(StreamsBlocked{true, kMaxStreamCount + rng.uniform(1, 1000)});
  } else if (m.id == "RetireUnknownSequence") {
    frames.push_back(
        RetireConnectionId{them.cids.highest_sequence.value_or(0) + 1 + rng.uniform(0, 10)});
  } else if (m.id == "StreamOffsetBeyondLimit") {
    if (them.flow.max_streams_bidi == 0) return std::nullopt;
    const auto index = them.flow.max_streams_bidi - 1;
    if (index < them.flow.opened_bidi) return std::nullopt;
    const auto id = 4 * index + role_bit;
    frames.push_back(Stream{id, stream_data_limit(them, id), false, rng.bytes(1)});
  } else if (m.id == "NewCidZeroLength") {
    auto f = fresh_cid(me, next_seq, rng);
    f.cid = ConnectionId{};
    frames.push_back(f);
  } else if (m.id == "NewCidRetireGreater") {
    auto f = fresh_cid(me, next_seq, rng);
    f.retire_prior_to = next_seq + rng.uniform(1, 5);
    frames.push_back(f);
  } else if (m.id == "MaxStreamsOverflow") {
    frames.push_back(MaxStreams{true, kMaxStreamCount + rng.uniform(1, 1000)});
  } else if (m.id == "ZeroLengthNewToken") {
    frames.push_back(NewToken{});
  } else {
    return std::nullopt;
  }
  return out;
}

}  // namespace quicheck
