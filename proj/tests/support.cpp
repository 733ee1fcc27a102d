#include "support.hpp"

#include <algorithm>

#include "quicheck/harness/tester.hpp"
#include "quicheck/wire/handshake_messages.hpp"

namespace quicheck::support {

namespace {

std::uint64_t any62(Rng& rng) {
  static constexpr std::array<std::uint64_t, 4> kCaps = {63, 16383, (1ULL << 30) - 1,
                                                         (1ULL << 62) - 1};
  return rng.uniform(0, kCaps[rng.uniform(0, 3)]);
}

Bytes blob(Rng& rng, std::size_t max) { return rng.bytes(rng.uniform(0, max)); }

std::size_t space_index(Endpoint e, PacketType t) {
  return static_cast<std::size_t>(e) * kPnSpaceCount + static_cast<std::size_t>(space_of(t));
}

}  // namespace

Frame random_frame(Rng& rng) {
  switch (rng.uniform(0, kFrameKindCount - 1)) {
    case 0:
      return Padding{rng.uniform(1, 64)};
    case 1:
      return Ping{};
    case 2: {
      Ack a;
      a.largest = rng.uniform(0, 1 << 20);
      a.delay = any62(rng);
      a.first_range = rng.uniform(0, a.largest);
      for (auto n = rng.uniform(0, 3); n > 0; --n) a.ranges.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
      if (rng.chance(0.3)) a.ecn = EcnCounts{any62(rng), any62(rng), any62(rng)};
      return a;
    }
    case 3:
      return ResetStream{any62(rng), any62(rng), any62(rng)};
    case 4:
      return StopSending{any62(rng), any62(rng)};
    case 5:
      return Crypto{rng.uniform(0, 1ULL << 40), blob(rng, 64)};
    case 6:
      return NewToken{blob(rng, 32)};
    case 7:
      return Stream{any62(rng), rng.chance(0.3) ? 0 : rng.uniform(0, 1ULL << 40), rng.chance(0.5),
                    blob(rng, 64)};
    case 8:
      return MaxData{any62(rng)};
    case 9:
      return MaxStreamData{any62(rng), any62(rng)};
    case 10:
      return MaxStreams{rng.chance(0.5), rng.uniform(0, 1ULL << 60)};
    case 11:
      return DataBlocked{any62(rng)};
    case 12:
      return StreamDataBlocked{any62(rng), any62(rng)};
    case 13:
      return StreamsBlocked{rng.chance(0.5), rng.uniform(0, 1ULL << 60)};
    case 14:
      return NewConnectionId{any62(rng), any62(rng), ConnectionId(blob(rng, 16)), rng.array<16>()};
    case 15:
      return RetireConnectionId{any62(rng)};
    case 16:
      return PathChallenge{rng.array<8>()};
    case 17:
      return PathResponse{rng.array<8>()};
    case 18: {
      const bool app = rng.chance(0.5);
      return ConnectionClose{app, any62(rng), app ? 0 : any62(rng), blob(rng, 32)};
    }
    case 19:
      return HandshakeDone{};
    default:
      return UnknownFrame{rng.uniform(0x1f, (1ULL << 62) - 1), blob(rng, 32)};
  }
}

Packet random_packet(Rng& rng) {
  static constexpr std::array<PacketType, 4> kTypes = {PacketType::kInitial, PacketType::kZeroRtt,
                                                       PacketType::kHandshake, PacketType::kOneRtt};
  Packet p;
  p.type = kTypes[rng.uniform(0, 3)];
  p.packet_number = rng.uniform(0, 0xffff);
  if (p.form() == HeaderForm::kShort) {
    p.dcid = ConnectionId(rng.bytes(8));
    p.spin = rng.chance(0.5);
    p.key_phase = rng.chance(0.5);
  } else {
    p.dcid = ConnectionId(blob(rng, 16));
    p.scid = ConnectionId(blob(rng, 16));
    if (p.type == PacketType::kInitial) p.token = blob(rng, 16);
  }
  for (auto n = rng.uniform(1, 4); n > 0; --n) {
    Frame f = random_frame(rng);
    // Adjacent PADDING runs decode as one frame.
    if (std::holds_alternative<Padding>(f) && !p.frames.empty() &&
        std::holds_alternative<Padding>(p.frames.back())) {
      continue;
    }
    p.frames.push_back(std::move(f));
  }
  return p;
}

Script::Script(Role role)
    : tester_role(role),
      client_cid(Bytes{0xc1, 0xc1, 0xc1, 0xc1, 0x00, 0x00, 0x00, 0x01}),
      server_cid(Bytes{0x5e, 0x5e, 0x5e, 0x5e, 0x00, 0x00, 0x00, 0x02}) {}

Address Script::address_of(Endpoint e) const {
  const Role r = e == Endpoint::kTester ? tester_role : opposite(tester_role);
  return r == Role::kClient ? kClientAddr : kServerAddr;
}

Packet Script::packet(Endpoint from, PacketType type, std::vector<Frame> frames) const {
  const bool client = (from == Endpoint::kTester) == (tester_role == Role::kClient);
  Packet p;
  p.type = type;
  p.dcid = client ? server_cid : client_cid;
  if (p.form() == HeaderForm::kLong) p.scid = client ? client_cid : server_cid;
  p.frames = std::move(frames);
  return p;
}

void Script::send(Endpoint from, std::vector<Packet> packets, std::optional<Address> src,
                  std::optional<Address> dst) {
  for (auto& p : packets) p.packet_number = next_pn[space_index(from, p.type)]++;
  records.push_back(TraceRecord{direction_of(from), now++,
                                Datagram{src.value_or(address_of(from)),
                                         dst.value_or(address_of(other(from))),
                                         encode_datagram(packets)}});
}

void Script::handshake(const TransportParameterSet& client_params,
                       const TransportParameterSet& server_params) {
  const Endpoint client = tester_role == Role::kClient ? Endpoint::kTester : Endpoint::kPeer;
  const Endpoint server = other(client);
  const Ack ack0 = make_ack({{0, 0}}, 0);
  send(client, {packet(client, PacketType::kInitial,
                       {Crypto{0, encode_handshake_message({HandshakeMessageType::kClientHello,
                                                            encode_transport_params(client_params)})}})});
  send(server,
       {packet(server, PacketType::kInitial,
               {ack0, Crypto{0, encode_handshake_message({HandshakeMessageType::kServerHello,
                                                          Bytes(32, 0x11)})}}),
        packet(server, PacketType::kHandshake,
               {Crypto{0, encode_handshake_messages(
                              {{HandshakeMessageType::kEncryptedExtensions,
                                encode_transport_params(server_params)},
                               {HandshakeMessageType::kFinished, Bytes(32, 0x22)}})}})});
  send(client, {packet(client, PacketType::kInitial, {ack0}),
                packet(client, PacketType::kHandshake,
                       {ack0, Crypto{0, encode_handshake_message(
                                            {HandshakeMessageType::kFinished, Bytes(32, 0x33)})}})});
  send(server, {packet(server, PacketType::kOneRtt, {HandshakeDone{}})});
}

void Script::handshake() {
  handshake(default_transport_params(Role::kClient, client_cid, {}),
            default_transport_params(Role::kServer, server_cid, server_cid));
}

Replayed replay(const std::vector<TraceRecord>& records, Role tester_role, MigrationPolicy policy) {
  Replayed out{ConnectionState(tester_role, policy), {}};
  for (const auto& r : records) {
    auto res = ingest_datagram(out.state, r.direction, r.datagram.src, r.datagram.dst,
                               r.datagram.bytes, r.timestamp_ms);
    out.verdicts.insert(out.verdicts.end(), res.verdicts.begin(), res.verdicts.end());
  }
  return out;
}

std::vector<TraceRecord> migration_ambiguity_records() {
  Script s(Role::kClient);
  s.handshake();
  const auto client = Endpoint::kTester;
  const auto server = Endpoint::kPeer;
  // Handshake-space packet numbers 1..9 from the first address.
  for (int i = 0; i < 9; ++i) s.send(client, {s.packet(client, PacketType::kHandshake, {Ping{}})});
  // Application packets 0..2 from the first address, 3 from the new one.
  for (int i = 0; i < 3; ++i) s.send(client, {s.packet(client, PacketType::kOneRtt, {Ping{}})});
  s.send(client, {s.packet(client, PacketType::kOneRtt, {Ping{}})}, kMigratedAddr);
  s.send(server, {s.packet(server, PacketType::kOneRtt, {PathChallenge{{1, 2, 3, 4, 5, 6, 7, 8}}})},
         std::nullopt, kMigratedAddr);
  s.send(client, {s.packet(client, PacketType::kOneRtt, {PathResponse{{1, 2, 3, 4, 5, 6, 7, 8}}})},
         kMigratedAddr);
  s.send(server, {s.packet(server, PacketType::kOneRtt, {Ping{}})}, std::nullopt, kMigratedAddr);
  return s.records;
}

std::vector<std::string> violated_ids(const std::vector<Verdict>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) {
    if (v.violation()) out.push_back(v.requirement);
  }
  return out;
}

}  // namespace quicheck::support
