#include "quicheck/harness/sim_peer.hpp"
#include "quicheck/harness/tester.hpp"

#include <algorithm>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"
#include "quicheck/wire/handshake_messages.hpp"

namespace quicheck {

namespace {

constexpr std::size_t kCidLength = 8;
constexpr std::size_t kMinInitialDatagram = 1200;
constexpr std::size_t kStreamChunk = 1100;

Bytes handshake_bytes(std::initializer_list<HandshakeMessage> msgs) {
  return encode_handshake_messages(std::vector<HandshakeMessage>(msgs));
}


}  // namespace

bool SimPeerConfig::conformant() const {
  return !decreasing_pn && !never_path_challenge && !wrong_error_code && !silent_close &&
         !wrong_level_close && ignore_unknown_tp;
}

SimPeerConfig SimPeerConfig::parse(std::string_view text) {
  SimPeerConfig c;
  if (text == "conformant") return c;
  if (!text.starts_with("defect:")) {
    throw InputError("--sim expects conformant or defect:<name>, got '" + std::string(text) + "'");
  }
  std::string_view name = text.substr(7);
  std::string_view arg;
  if (const auto eq = name.find('='); eq != std::string_view::npos) {
    arg = name.substr(eq + 1);
    name = name.substr(0, eq);
  }
  if (name == "DecreasingPN") {
    c.decreasing_pn = true;
  } else if (name == "NeverPathChallenge") {
    c.never_path_challenge = true;
  } else if (name == "WrongErrorCode") {
    c.wrong_error_code = error_code::kInternalError;
    if (!arg.empty()) {
      const auto code = error_code_from_name(arg);
      if (!code) throw InputError("unknown error code '" + std::string(arg) + "'");
      c.wrong_error_code = *code;
    }
    return c;
  } else if (name == "SilentClose") {
    c.silent_close = true;
  } else if (name == "WrongLevelClose") {
    c.wrong_level_close = true;
  } else if (name == "RejectUnknownTP") {
    c.ignore_unknown_tp = false;
  } else {
    throw InputError("unknown simulated peer defect '" + std::string(name) + "'");
  }
  if (!arg.empty()) throw InputError("defect " + std::string(name) + " takes no argument");
  return c;
}

std::string SimPeerConfig::describe() const {
  if (conformant()) return "sim:conformant";
  std::string out = "sim:defect";
  if (decreasing_pn) out += ":DecreasingPN";
  if (never_path_challenge) out += ":NeverPathChallenge";
  if (wrong_error_code) out += ":WrongErrorCode=" + error_code_name(*wrong_error_code);
  if (silent_close) out += ":SilentClose";
  if (wrong_level_close) out += ":WrongLevelClose";
  if (!ignore_unknown_tp) out += ":RejectUnknownTP";
  return out;
}

SimPeer::SimPeer(Role role, const SimPeerConfig& config, std::uint64_t seed,
                 const FixedParams& params)
    : role_(role),
      config_(config),
      rng_(seed),
      params_(params),
      state_(role, MigrationPolicy::kAppLevelOnly) {
  last_peer_address_ = role == Role::kServer ? params.client_address : params.server_address;
  state_.goal_requests = params.requests;
}

Address SimPeer::self_address() const {
  return role_ == Role::kServer ? params_.server_address : params_.client_address;
}

Address SimPeer::destination() const {
  try {
    return expected_peer_address(state_, Endpoint::kPeer, MigrationPolicy::kAppLevelOnly);
  } catch (const UndefinedAddressError&) {
    return last_peer_address_;
  }
}

TransportParameterSet SimPeer::hello_params() const {
  return default_transport_params(role_, scid_, original_dcid_);
}

Packet SimPeer::header(PacketType type) const {
  Packet p;
  p.type = type;
  p.version = params_.version;
  p.dcid = dcid_;
  if (p.form() == HeaderForm::kLong) p.scid = scid_;
  return p;
}

std::uint64_t SimPeer::packet_number(PacketType type) {
  auto pn = next_packet_number(state_, self(), space_of(type));
  if (type == PacketType::kOneRtt) {
    if (config_.decreasing_pn && app_packets_ == 2 && pn >= 2) pn -= 2;
    ++app_packets_;
  }
  return pn;
}

void SimPeer::emit(std::vector<Packet> packets, Address dst, std::uint64_t now) {
  Datagram d{self_address(), dst, encode_datagram(packets)};
  ingest_datagram(state_, Direction::kFromTester, d.src, d.dst, d.bytes, now);
  outbox_.push_back(std::move(d));
}

void SimPeer::close(std::uint64_t code, const std::string& reason, std::uint64_t now) {
  closed_ = true;
  if (config_.silent_close) return;
  if (config_.wrong_error_code && code != error_code::kNoError) code = *config_.wrong_error_code;
  PacketType type = PacketType::kOneRtt;
  if (!config_.wrong_level_close && !state_.handshake_confirmed(self())) {
    const bool handshake_keys =
        role_ == Role::kServer
            ? flight_sent_
            : state_.peer().pn[static_cast<std::size_t>(PnSpace::kHandshake)].largest_sent.has_value();
    type = handshake_keys ? PacketType::kHandshake : PacketType::kInitial;
  }
  Packet p = header(type);
  p.packet_number = packet_number(type);
  p.frames.push_back(ConnectionClose{false, code, 0, to_bytes(reason.substr(0, 64))});
  emit({std::move(p)}, destination(), now);
}

void SimPeer::receive(const Datagram& d, std::uint64_t now) {
  if (closed_ || draining_) return;
  last_peer_address_ = d.src;
  const auto r = ingest_datagram(state_, Direction::kFromPeer, d.src, d.dst, d.bytes, now);
  if (!r.decoded) {
    close(default_registry().at(req::kCodecFailure).error_code, "undecodable datagram", now);
    return;
  }
  for (const auto& pkt : r.packets) {
    if (pkt.form() != HeaderForm::kLong) continue;
    if (role_ == Role::kServer && !started_) {
      original_dcid_ = pkt.dcid;
      dcid_ = pkt.scid;
      scid_ = ConnectionId(rng_.bytes(kCidLength));
      started_ = true;
    } else if (role_ == Role::kClient && dcid_ == original_dcid_) {
      dcid_ = pkt.scid;
    }
  }
  if (state_.peer().close) {
    draining_ = true;
    return;
  }
  const auto& registry = default_registry();
  for (const auto& v : r.verdicts) {
    if (v.direction != Direction::kFromPeer || !v.violation() || registry.is_advisory(v.requirement)) {
      continue;
    }
    const auto code = registry.at(v.requirement).error_code;
    if (code != error_code::kNoError) {
      close(code, v.requirement + ": " + v.detail, now);
      return;
    }
  }
  if (!config_.ignore_unknown_tp && state_.peer().handshake.params) {
    for (const auto& e : state_.peer().handshake.params->entries()) {
      if (!tp::is_known(e.id)) {
        close(error_code::kTransportParameterError, "unknown transport parameter", now);
        return;
      }
    }
  }
  on_handshake(now);
  on_app(r.packets, d.src);
}

void SimPeer::on_handshake(std::uint64_t now) {
  GenerationPlan none;
  const HeaderTemplate hdr{dcid_, scid_, {}, params_.version};
  auto scripted = [&](PacketType type) {
    GenContext ctx{state_, self(), type, &queue_};
    return build_packet(ctx, none, rng_, hdr);
  };
  const auto& other = state_.peer().handshake;
  if (role_ == Role::kServer) {
    if (started_ && other.hello_sent && !flight_sent_) {
      queue_.push_crypto(PnSpace::kInitial,
                         handshake_bytes({{HandshakeMessageType::kServerHello, rng_.bytes(32)}}));
      queue_.push_crypto(
          PnSpace::kHandshake,
          handshake_bytes({{HandshakeMessageType::kEncryptedExtensions,
                            encode_transport_params(hello_params())},
                           {HandshakeMessageType::kFinished, rng_.bytes(32)}}));
      emit({scripted(PacketType::kInitial), scripted(PacketType::kHandshake)}, destination(), now);
      flight_sent_ = true;
    }
    if (flight_sent_ && other.finished_sent && !done_sent_) {
      Packet p = header(PacketType::kOneRtt);
      p.packet_number = packet_number(PacketType::kOneRtt);
      p.frames.push_back(HandshakeDone{});
      emit({std::move(p)}, destination(), now);
      done_sent_ = true;
    }
    return;
  }
  if (started_ && other.finished_sent && !flight_sent_) {
    queue_.push_crypto(PnSpace::kHandshake,
                       handshake_bytes({{HandshakeMessageType::kFinished, rng_.bytes(32)}}));
    emit({scripted(PacketType::kInitial), scripted(PacketType::kHandshake)}, destination(), now);
    flight_sent_ = true;
  }
  if (flight_sent_ && !requests_queued_) {
    const auto limit = std::min(params_.requests, state_.peer().flow.max_streams_bidi);
    for (std::uint64_t i = 0; i < limit; ++i) {
      queue_.add_stream(4 * i, to_bytes("GET /index-" + std::to_string(i) + ".html\r\n"));
    }
    requests_queued_ = true;
  }
}

void SimPeer::on_app(const std::vector<Packet>& packets, Address src) {
  for (const auto& pkt : packets) {
    for (const auto& f : pkt.frames) {
      if (const auto* ch = std::get_if<PathChallenge>(&f)) {
        responses_.emplace_back(ch->data, src);
      } else if (const auto* ss = std::get_if<StopSending>(&f); ss && role_ == Role::kServer) {
        stopped_.insert(ss->stream_id);
        auto it = queue_.streams.find(ss->stream_id);
        if (it != queue_.streams.end() && it->second.pending()) {
          resets_.push_back(ResetStream{ss->stream_id, 0, it->second.sent});
          it->second.reset = true;
        }
      }
    }
  }
  if (role_ != Role::kServer) return;
  for (const auto& [id, rs] : state_.tester().flow.streams) {
    if (!is_client_initiated(id) || !is_bidi(id) || answered_.contains(id)) continue;
    const bool complete = rs.final_size && rs.highest_offset == *rs.final_size;
    if (!rs.reset && !complete) continue;
    answered_.insert(id);
    // An aborted request is answered by aborting the response.
    if (rs.reset || stopped_.contains(id)) {
      resets_.push_back(ResetStream{id, 0, 0});
    } else {
      queue_.add_stream(id, rng_.bytes(rng_.uniform(500, 3000)));
    }
  }
}

bool SimPeer::send_app(std::uint64_t now) {
  const bool app_ready = role_ == Role::kServer ? done_sent_ : flight_sent_;
  if (!app_ready) return false;
  if (!responses_.empty()) {
    auto [data, addr] = responses_.front();
    responses_.pop_front();
    Packet p = header(PacketType::kOneRtt);
    p.packet_number = packet_number(PacketType::kOneRtt);
    p.frames.push_back(PathResponse{data});
    emit({std::move(p)}, addr, now);
    return true;
  }
  const auto& pending = state_.tester().paths.pending_validation;
  if (!pending.empty() && !config_.never_path_challenge) {
    const Address target = pending.front();
    Packet p = header(PacketType::kOneRtt);
    p.packet_number = packet_number(PacketType::kOneRtt);
    p.frames.push_back(PathChallenge{rng_.array<8>()});
    emit({std::move(p)}, target, now);
    return true;
  }
  if (role_ == Role::kClient && state_.handshake_confirmed(self()) &&
      completed_request_streams(state_) >= params_.requests) {
    close(error_code::kNoError, "done", now);
    return true;
  }

  Packet p = header(PacketType::kOneRtt);
  const auto app = static_cast<std::size_t>(PnSpace::kApplication);
  if (state_.tester().pn[app].unacked_eliciting > 0) {
    if (auto ack = ack_for(state_, self(), PnSpace::kApplication)) p.frames.push_back(*ack);
  }
  while (!resets_.empty()) {
    p.frames.push_back(resets_.front());
    resets_.pop_front();
  }
  GenContext ctx{state_, self(), PacketType::kOneRtt, &queue_};
  if (kind_legal(FrameKind::kStream, ctx)) {
    const Frame f = synthesize_frame(FrameKind::kStream, ctx, rng_, kStreamChunk);
    note_sent(queue_, f, PacketType::kOneRtt);
    p.frames.push_back(f);
  }
  if (p.frames.empty()) return false;
  p.packet_number = packet_number(PacketType::kOneRtt);
  emit({std::move(p)}, destination(), now);
  return true;
}

std::optional<Datagram> SimPeer::poll(std::uint64_t now) {
  if (outbox_.empty() && !closed_ && !draining_) {
    if (role_ == Role::kClient && !started_) {
      original_dcid_ = dcid_ = ConnectionId(rng_.bytes(kCidLength));
      scid_ = ConnectionId(rng_.bytes(kCidLength));
      queue_.push_crypto(PnSpace::kInitial,
                         handshake_bytes({{HandshakeMessageType::kClientHello,
                                           encode_transport_params(hello_params())}}));
      GenerationPlan none;
      GenContext ctx{state_, self(), PacketType::kInitial, &queue_};
      Packet p = build_packet(ctx, none, rng_, HeaderTemplate{dcid_, scid_, {}, params_.version});
      pad_to(p, kMinInitialDatagram);
      emit({std::move(p)}, destination(), now);
      started_ = true;
    } else {
      send_app(now);
    }
  }
  if (outbox_.empty()) return std::nullopt;
  Datagram d = std::move(outbox_.front());
  outbox_.pop_front();
  return d;
}

}  // namespace quicheck
