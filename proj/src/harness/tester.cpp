#include "quicheck/harness/tester.hpp"

#include <algorithm>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"
#include "quicheck/wire/handshake_messages.hpp"

namespace quicheck {

namespace {

constexpr std::size_t kCidLength = 8;
constexpr std::size_t kMinInitialDatagram = 1200;
// Connection credit is topped up when less than this remains.
constexpr std::uint64_t kCreditLowWater = 1000;
constexpr std::uint64_t kCreditStep = 4096;

Bytes messages(std::initializer_list<HandshakeMessage> msgs) {
  return encode_handshake_messages(std::vector<HandshakeMessage>(msgs));
}

}  // namespace

TransportParameterSet default_transport_params(Role role, const ConnectionId& scid,
                                               const ConnectionId& original_dcid) {
  TransportParameterSet set;
  if (role == Role::kServer) {
    set.set_connection_id(tp::kOriginalDestinationConnectionId, original_dcid);
  }
  set.set_integer(tp::kMaxIdleTimeout, 30000);
  if (role == Role::kServer) {
    Bytes token(16, 0x5a);
    std::copy(scid.bytes().begin(), scid.bytes().end(), token.begin());
    set.set_bytes(tp::kStatelessResetToken, token);
  }
  set.set_integer(tp::kMaxUdpPayloadSize, 1500);
  set.set_integer(tp::kInitialMaxData, 1 << 20);
  set.set_integer(tp::kInitialMaxStreamDataBidiLocal, 1 << 18);
  set.set_integer(tp::kInitialMaxStreamDataBidiRemote, 1 << 18);
  set.set_integer(tp::kInitialMaxStreamDataUni, 1 << 18);
  set.set_integer(tp::kInitialMaxStreamsBidi, 100);
  set.set_integer(tp::kInitialMaxStreamsUni, 100);
  set.set_integer(tp::kAckDelayExponent, 3);
  set.set_integer(tp::kMaxAckDelay, 25);
  set.set_integer(tp::kActiveConnectionIdLimit, 2);
  set.set_connection_id(tp::kInitialSourceConnectionId, scid);
  return set;
}

void pad_to(Packet& p, std::size_t size) {
  const auto len = encode_packet(p).size();
  if (len < size) p.frames.push_back(Padding{size - len});
}

Tester::Tester(const TestSpec& spec, std::uint64_t seed, bool allow_migration)
    : spec_(spec), rng_(seed), allow_migration_(allow_migration) {
  if (!spec_.mutations.empty()) {
    mutation_ = find_mutation(spec_.mutations.front().id);
    if (!mutation_) throw InputError("unknown mutation " + spec_.mutations.front().id);
  }
  const bool client = role() == Role::kClient;
  local_ = client ? spec_.params.client_address : spec_.params.server_address;
  remote_ = client ? spec_.params.server_address : spec_.params.client_address;
  scid_ = ConnectionId(rng_.bytes(kCidLength));
  if (client) original_dcid_ = dcid_ = ConnectionId(rng_.bytes(kCidLength));
  stimulus_at_ = rng_.uniform(2, 5);
  migrate_at_ = 1;
}

Packet Tester::header(const ConnectionState& state, PacketType type) const {
  Packet p;
  p.type = type;
  p.version = spec_.params.version;
  p.dcid = dcid_;
  if (p.form() == HeaderForm::kLong) p.scid = scid_;
  p.packet_number = next_packet_number(state, Endpoint::kTester, space_of(type));
  return p;
}

Datagram Tester::wrap(std::vector<Packet> packets) const {
  return Datagram{local_, remote_, encode_datagram(packets)};
}

void Tester::on_datagram(const Datagram& d, const std::vector<Packet>& packets) {
  remote_ = d.src;
  for (const auto& pkt : packets) {
    if (pkt.form() == HeaderForm::kLong && !cids_learned_) {
      if (role() == Role::kServer) original_dcid_ = pkt.dcid;
      dcid_ = pkt.scid;
      cids_learned_ = true;
    }
    for (const auto& f : pkt.frames) {
      if (const auto* ch = std::get_if<PathChallenge>(&f)) challenges_.emplace_back(ch->data, d.dst);
    }
  }
}

std::optional<Datagram> Tester::poll(const ConnectionState& state, std::uint64_t) {
  if (closed_) return std::nullopt;
  if (!challenges_.empty() && flight_sent_) {
    auto [data, at] = challenges_.front();
    challenges_.pop_front();
    Packet p = header(state, PacketType::kOneRtt);
    p.frames.push_back(PathResponse{data});
    Datagram d = wrap({std::move(p)});
    d.src = at;
    return d;
  }
  if (auto d = handshake(state)) return d;
  return application(state);
}

std::optional<Datagram> Tester::handshake(const ConnectionState& state) {
  GenerationPlan none;
  auto scripted = [&](PacketType type) {
    GenContext ctx{state, Endpoint::kTester, type, &queue_};
    return build_packet(ctx, none, rng_, HeaderTemplate{dcid_, scid_, {}, spec_.params.version});
  };
  auto hello = [&] {
    auto set = default_transport_params(role(), scid_, original_dcid_);
    for (const auto& [id, value] : spec_.params.tester_params) set.set_integer(id, value);
    for (const auto& e : spec_.params.extra_transport_params) set.append(e.id, e.value);
    return encode_transport_params(set);
  };
  auto inject = [&](Packet& p, MutationScope scope) {
    if (!mutation_ || stimulus_sent_) return;
    if (mutation_->scope != scope && !(scope == MutationScope::kHello &&
                                       mutation_->scope == MutationScope::kInitialPacket &&
                                       p.type == PacketType::kInitial)) {
      return;
    }
    if (auto m = apply_mutation(*mutation_, p, rng_, state)) {
      p = std::move(*m);
      stimulus_sent_ = true;
    }
  };
  const auto& other = state.peer().handshake;

  if (role() == Role::kClient) {
    if (!started_) {
      queue_.push_crypto(PnSpace::kInitial,
                         messages({{HandshakeMessageType::kClientHello, hello()}}));
      Packet p = scripted(PacketType::kInitial);
      inject(p, MutationScope::kHello);
      pad_to(p, kMinInitialDatagram);
      started_ = true;
      return wrap({std::move(p)});
    }
    if (!flight_sent_ && other.finished_sent) {
      if (stimulus_sent_) return std::nullopt;
      queue_.push_crypto(PnSpace::kHandshake,
                         messages({{HandshakeMessageType::kFinished, rng_.bytes(32)}}));
      flight_sent_ = true;
      return wrap({scripted(PacketType::kInitial), scripted(PacketType::kHandshake)});
    }
    if (flight_sent_ && !requests_queued_) {
      const auto n = std::min(spec_.params.requests, state.peer().flow.max_streams_bidi);
      for (std::uint64_t i = 0; i < n; ++i) {
        queue_.add_stream(4 * i, to_bytes("GET /index-" + std::to_string(i) + ".html\r\n"));
      }
      requests_queued_ = true;
    }
    return std::nullopt;
  }

  if (!started_ && other.hello_sent && cids_learned_) {
    started_ = true;
    queue_.push_crypto(PnSpace::kInitial,
                       messages({{HandshakeMessageType::kServerHello, rng_.bytes(32)}}));
    queue_.push_crypto(PnSpace::kHandshake,
                       messages({{HandshakeMessageType::kEncryptedExtensions, hello()},
                                 {HandshakeMessageType::kFinished, rng_.bytes(32)}}));
    Packet initial = scripted(PacketType::kInitial);
    Packet hs = scripted(PacketType::kHandshake);
    inject(hs, MutationScope::kHello);
    flight_sent_ = true;
    return wrap({std::move(initial), std::move(hs)});
  }
  if (flight_sent_ && !done_sent_ && other.finished_sent && !stimulus_sent_) {
    Packet p = header(state, PacketType::kOneRtt);
    p.frames.push_back(HandshakeDone{});
    done_sent_ = true;
    return wrap({std::move(p)});
  }
  return std::nullopt;
}

bool Tester::mutation_due(const ConnectionState& state) const {
  return mutation_ && mutation_->scope == MutationScope::kFrame && !stimulus_sent_ &&
         state.handshake_confirmed(Endpoint::kTester);
}

std::optional<Datagram> Tester::application(const ConnectionState& state) {
  // After the stimulus the tester only waits for the reaction.
  if (stimulus_sent_) return std::nullopt;
  const bool ready = role() == Role::kClient ? flight_sent_ : done_sent_;
  if (!ready || state.peer().close) return std::nullopt;
  const bool confirmed = state.handshake_confirmed(Endpoint::kTester);
  const auto& me = state.tester();

  if (role() == Role::kServer) {
    for (const auto& [id, rs] : me.flow.streams) {
      if (!is_client_initiated(id) || !is_bidi(id) || answered_.contains(id)) continue;
      if (!rs.reset && rs.final_size && rs.highest_offset == *rs.final_size) {
        answered_.insert(id);
        queue_.add_stream(id, rng_.bytes(rng_.uniform(500, 3000)));
      }
    }
  }

  if (role() == Role::kClient && confirmed && !mutation_) {
    const auto target = spec_.params.close_after.value_or(spec_.params.requests);
    if (completed_request_streams(state) >= target) {
      Packet p = header(state, PacketType::kOneRtt);
      p.frames.push_back(ConnectionClose{false, error_code::kNoError, 0, to_bytes("done")});
      closed_ = true;
      return wrap({std::move(p)});
    }
  }

  GenContext ctx{state, Endpoint::kTester, PacketType::kOneRtt, &queue_};
  const auto app = static_cast<std::size_t>(PnSpace::kApplication);
  const bool low_credit = spec_.plan.allows(FrameKind::kMaxData) &&
                          me.flow.max_data - std::min(me.flow.max_data, me.flow.consumed) <
                              kCreditLowWater;
  const bool need = me.pn[app].unacked_eliciting > 0 || kind_legal(FrameKind::kStream, ctx) ||
                    low_credit || mutation_due(state);
  if (!need) return std::nullopt;

  Packet p;
  try {
    p = build_packet(ctx, spec_.plan, rng_, HeaderTemplate{dcid_, scid_, {}, spec_.params.version});
  } catch (const ExhaustionError&) {
    p = header(state, PacketType::kOneRtt);
    p.frames.push_back(Ping{});
  }
  if (low_credit && std::none_of(p.frames.begin(), p.frames.end(), [](const Frame& f) {
        return std::holds_alternative<MaxData>(f);
      })) {
    p.frames.push_back(MaxData{me.flow.max_data + kCreditStep});
  }

  if (confirmed) ++confirmed_packets_;
  if (mutation_due(state) && confirmed_packets_ >= stimulus_at_) {
    if (auto m = apply_mutation(*mutation_, p, rng_, state)) {
      p = std::move(*m);
      stimulus_sent_ = true;
    }
  }
  if (spec_.migration_allowed && allow_migration_ && confirmed && !migrated_ &&
      confirmed_packets_ >= migrate_at_ && classify_probing_packet(p) == Probing::kNonProbing) {
    ++local_.port;
    migrated_ = true;
  }
  return wrap({std::move(p)});
}

}  // namespace quicheck
