#include "quicheck/engine/monitor.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

namespace {

constexpr std::uint64_t kMaxStreamCount = std::uint64_t{1} << 60;
constexpr std::uint64_t kDefaultActiveCidLimit = 2;

std::size_t space_index(PacketType t) { return static_cast<std::size_t>(space_of(t)); }

bool ack_eliciting(const Frame& f) {
  const auto k = kind_of(f);
  return k != FrameKind::kPadding && k != FrameKind::kAck && k != FrameKind::kConnectionClose;
}

// Frames permitted in Initial and Handshake packets. UNKNOWN is judged on
// its own and never here.
bool allowed_at(const Frame& f, PacketType type) {
  const auto k = kind_of(f);
  if (k == FrameKind::kUnknown) return true;
  switch (type) {
    case PacketType::kInitial:
    case PacketType::kHandshake:
      if (k == FrameKind::kConnectionClose) return !std::get<ConnectionClose>(f).application;
      return k == FrameKind::kPadding || k == FrameKind::kPing || k == FrameKind::kAck ||
             k == FrameKind::kCrypto;
    case PacketType::kZeroRtt:
      return k != FrameKind::kAck && k != FrameKind::kCrypto && k != FrameKind::kHandshakeDone &&
             k != FrameKind::kNewToken && k != FrameKind::kPathResponse;
    case PacketType::kOneRtt:
      return true;
  }
  return true;
}

std::string hex_of(const PathData& d) { return to_hex(Bytes(d.begin(), d.end())); }

// Every PN in [low, high] must have been sent by `sender` in the space.
bool all_sent(const PnLedger& ledger, const PacketNumberInterval& iv) {
  auto it = ledger.sent.lower_bound(iv.low);
  std::uint64_t expect = iv.low;
  while (it != ledger.sent.end() && it->first <= iv.high) {
    if (it->first != expect) return false;
    if (expect == iv.high) return true;
    ++expect;
    ++it;
  }
  return false;
}

std::uint64_t active_cid_limit(const EndpointState& e) {
  if (!e.handshake.params) return kDefaultActiveCidLimit;
  try {
    return e.handshake.params->integer(tp::kActiveConnectionIdLimit).value_or(kDefaultActiveCidLimit);
  } catch (const CodecError&) {
    return kDefaultActiveCidLimit;
  }
}

struct FrameChecker {
  ConnectionState& state;
  const PacketContext& ctx;
  std::vector<Verdict>& out;
  EndpointState& sender;
  EndpointState& receiver;
  bool level_ok;

  void flag(std::string_view id, std::string detail) {
    out.push_back(violation(id, ctx.direction, ctx.event_index, std::move(detail)));
  }

  void operator()(const Padding&) {}
  void operator()(const Ping&) {}

  void operator()(const Ack& a) {
    const auto intervals = ack_intervals(a);
    if (!intervals) {
      flag(req::kAckUnsent, "ACK ranges underflow below packet number 0");
      return;
    }
    const auto& ledger = receiver.pn[space_index(ctx.type)];
    for (const auto& iv : *intervals) {
      if (!all_sent(ledger, iv)) {
        flag(req::kAckUnsent, "ACK covers [" + std::to_string(iv.low) + ", " +
                                  std::to_string(iv.high) + "] including unsent packets");
        return;
      }
    }
  }

  // Shared accounting for data `sender` puts on a stream up to `end`.
  void account(std::uint64_t stream_id, std::uint64_t end, std::optional<std::uint64_t> final,
               bool reset) {
    auto& flow = receiver.flow;
    auto& rs = flow.streams[stream_id];
    if (rs.final_size) {
      if (end > *rs.final_size || (final && *final != *rs.final_size)) {
        flag(req::kFinalSize, "stream " + std::to_string(stream_id) + " final size " +
                                  std::to_string(*rs.final_size) + " changed");
      }
    } else if (final && *final < rs.highest_offset) {
      flag(req::kFinalSize, "stream " + std::to_string(stream_id) + " final size " +
                                std::to_string(*final) + " below received offset " +
                                std::to_string(rs.highest_offset));
    }
    const std::uint64_t grow = end > rs.highest_offset ? end - rs.highest_offset : 0;
    if (flow.params_known) {
      const auto limit = stream_data_limit(receiver, stream_id);
      if (end > limit) {
        flag(req::kFlowControl, "stream " + std::to_string(stream_id) + " data to " +
                                    std::to_string(end) + " exceeds limit " + std::to_string(limit));
      } else if (flow.consumed + grow > flow.max_data) {
        flag(req::kFlowControl, "connection data " + std::to_string(flow.consumed + grow) +
                                    " exceeds MAX_DATA " + std::to_string(flow.max_data));
      }
    }
    flow.consumed += grow;
    rs.highest_offset = std::max(rs.highest_offset, end);
    if (final && !rs.final_size) rs.final_size = final;
    if (reset) rs.reset = true;
  }

  void operator()(const ResetStream& f) {
    account(f.stream_id, f.final_size, f.final_size, true);
  }

  void operator()(const StopSending&) {}

  void operator()(const Crypto& f) {
    const auto space = space_index(ctx.type);
    for (const auto& msg : sender.handshake.crypto[space].add(f.offset, f.data)) {
      switch (msg.type) {
        case HandshakeMessageType::kClientHello:
        case HandshakeMessageType::kEncryptedExtensions: {
          if (msg.type == HandshakeMessageType::kClientHello) sender.handshake.hello_sent = true;
          TransportParameterSet set;
          try {
            set = decode_transport_params(msg.body);
          } catch (const CodecError& e) {
            flag(req::kTpInvalidValue, std::string("undecodable transport parameters: ") + e.what());
            break;
          }
          auto verdicts = check_transport_params(state, set, ctx.direction, ctx.event_index);
          out.insert(out.end(), verdicts.begin(), verdicts.end());
          sender.handshake.params = set;
          apply_transport_params(sender, set);
          break;
        }
        case HandshakeMessageType::kServerHello:
          sender.handshake.hello_sent = true;
          break;
        case HandshakeMessageType::kFinished:
          sender.handshake.finished_sent = true;
          break;
        case HandshakeMessageType::kNewSessionTicket:
          break;
      }
    }
  }

  void operator()(const NewToken& f) {
    if (level_ok && sender.role == Role::kClient) {
      flag(req::kRoleIllegalFrame, "NEW_TOKEN sent by the client");
      return;
    }
    if (f.token.empty()) {
      flag(req::kNewTokenEmpty, "NEW_TOKEN with empty token");
      return;
    }
    receiver.tokens_received.push_back(f.token);
  }

  void operator()(const Stream& f) {
    const std::uint64_t len = f.data.size();
    if (f.offset > kVarIntMax || len > kVarIntMax - f.offset) {
      flag(req::kStreamOffsetRange, "stream " + std::to_string(f.stream_id) +
                                        " offset+length exceeds 2^62-1");
      return;
    }
    auto& flow = receiver.flow;
    if (initiator_of(f.stream_id) == sender.role) {
      const auto limit = is_bidi(f.stream_id) ? flow.max_streams_bidi : flow.max_streams_uni;
      const auto index = stream_index(f.stream_id);
      if (flow.params_known && index >= limit) {
        flag(req::kStreamIdLimit, "stream " + std::to_string(f.stream_id) + " beyond limit of " +
                                      std::to_string(limit) + " streams");
      }
      auto& opened = is_bidi(f.stream_id) ? flow.opened_bidi : flow.opened_uni;
      opened = std::max(opened, index + 1);
    }
    const std::uint64_t end = f.offset + len;
    account(f.stream_id, end, f.fin ? std::optional<std::uint64_t>(end) : std::nullopt, false);
  }

  void operator()(const MaxData& f) {
    sender.flow.max_data = std::max(sender.flow.max_data, f.maximum);
  }

  void operator()(const MaxStreamData& f) {
    auto& flow = sender.flow;
    const auto current = stream_data_limit(sender, f.stream_id);
    flow.stream_limit[f.stream_id] = std::max(current, f.maximum);
  }

  void operator()(const MaxStreams& f) {
    if (f.maximum > kMaxStreamCount) {
      flag(req::kMaxStreamsRange, "MAX_STREAMS " + std::to_string(f.maximum) + " exceeds 2^60");
      return;
    }
    auto& limit = f.bidi ? sender.flow.max_streams_bidi : sender.flow.max_streams_uni;
    limit = std::max(limit, f.maximum);
  }

  void operator()(const DataBlocked&) {}
  void operator()(const StreamDataBlocked&) {}

  void operator()(const StreamsBlocked& f) {
    if (f.limit > kMaxStreamCount) {
      flag(req::kStreamsBlockedRange,
           "STREAMS_BLOCKED " + std::to_string(f.limit) + " exceeds 2^60");
    }
  }

  void operator()(const NewConnectionId& f) {
    if (f.cid.empty() || !f.cid.within_limit()) {
      flag(req::kNcidLen, "NEW_CONNECTION_ID with " + std::to_string(f.cid.size()) + "-byte CID");
      return;
    }
    if (f.retire_prior_to > f.sequence) {
      flag(req::kNcidRtp, "retire_prior_to " + std::to_string(f.retire_prior_to) +
                              " above sequence " + std::to_string(f.sequence));
      return;
    }
    CidLedger next = sender.cids;
    if (next.issued.contains(f.sequence)) return;  // retransmission
    next.issued[f.sequence] = f.cid;
    next.retire_prior_to = std::max(next.retire_prior_to, f.retire_prior_to);
    next.highest_sequence = std::max(next.highest_sequence.value_or(0), f.sequence);
    const auto limit = active_cid_limit(receiver);
    if (next.active_count() > limit) {
      flag(req::kNcidLimit, std::to_string(next.active_count()) +
                                " active connection IDs exceed limit " + std::to_string(limit));
      return;
    }
    sender.cids = std::move(next);
  }

  void operator()(const RetireConnectionId& f) {
    if (!receiver.cids.issued.contains(f.sequence)) {
      flag(req::kRcidUnknownSeq,
           "RETIRE_CONNECTION_ID for unissued sequence " + std::to_string(f.sequence));
      return;
    }
    receiver.cids.retired.insert(f.sequence);
  }

  void operator()(const PathChallenge& f) {
    sender.paths.challenges_sent[f.data] = ctx.dst;
    std::erase(sender.paths.pending_validation, ctx.dst);
  }

  void operator()(const PathResponse& f) {
    auto& challenges = receiver.paths.challenges_sent;
    const auto it = challenges.find(f.data);
    if (it == challenges.end()) {
      flag(req::kPathResponseMismatch, "PATH_RESPONSE " + hex_of(f.data) + " matches no challenge");
      return;
    }
    receiver.paths.validated.insert(it->second);
    challenges.erase(it);
  }

  void operator()(const ConnectionClose& f) {
    if (sender.close) return;
    const Endpoint who = sender_of(ctx.direction);
    CloseInfo info;
    info.application = f.application;
    info.error_code = f.error_code;
    info.frame_type = f.frame_type;
    info.packet_type = ctx.type;
    info.level_legal = !(ctx.type == PacketType::kOneRtt && !state.handshake_confirmed(who));
    info.event_index = ctx.event_index;
    info.timestamp_ms = state.now_ms;
    sender.close = info;
    if (sender.role == Role::kServer && receiver.sent_initial_token && !f.application &&
        (f.error_code == error_code::kInvalidToken ||
         f.error_code == error_code::kProtocolViolation)) {
      state.is_invalid_token = true;
    }
  }

  void operator()(const HandshakeDone&) {
    if (level_ok && sender.role == Role::kClient) {
      flag(req::kRoleIllegalFrame, "HANDSHAKE_DONE sent by the client");
      return;
    }
    sender.handshake.handshake_done_sent = true;
  }

  void operator()(const UnknownFrame& f) {
    flag(req::kUnknownFrame, "frame type 0x" + to_hex(encode_varint(f.type)));
  }
};

}  // namespace

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kDatagramReceived: return "datagram_received";
    case EventKind::kDatagramSent: return "datagram_sent";
    case EventKind::kPacket: return "packet_event";
    case EventKind::kFrame: return "frame_event";
    case EventKind::kTimeout: return "timeout";
    case EventKind::kClose: return "close";
  }
  return "?";
}

Probing classify_probing(const Frame& frame) {
  switch (kind_of(frame)) {
    case FrameKind::kPadding:
    case FrameKind::kPathChallenge:
    case FrameKind::kPathResponse:
    case FrameKind::kNewConnectionId:
      return Probing::kProbing;
    default:
      return Probing::kNonProbing;
  }
}

Probing classify_probing_packet(const Packet& pkt) {
  for (const auto& f : pkt.frames) {
    if (classify_probing(f) == Probing::kNonProbing) return Probing::kNonProbing;
  }
  return Probing::kProbing;
}

std::vector<Verdict> packet_event(ConnectionState& state, const Packet& pkt, Direction dir,
                                  Address src, Address dst,
                                  const std::vector<std::string>& annotations) {
  std::vector<Verdict> out;
  const std::uint64_t idx = state.next_event;
  auto flag = [&](std::string_view id, std::string detail) {
    out.push_back(violation(id, dir, idx, std::move(detail)));
  };
  auto& sender = state.at(sender_of(dir));
  auto& receiver = state.at(other(sender_of(dir)));
  const auto space = space_index(pkt.type);

  if (!pkt.dcid.within_limit() || !pkt.scid.within_limit()) {
    flag(req::kCidLenMax, "connection ID of " +
                              std::to_string(std::max(pkt.dcid.size(), pkt.scid.size())) +
                              " bytes");
  }
  if (pkt.form() == HeaderForm::kLong && pkt.version != kDraft29Version) {
    flag(req::kVersion, "version 0x" + to_hex(Bytes{static_cast<std::uint8_t>(pkt.version >> 24),
                                                    static_cast<std::uint8_t>(pkt.version >> 16),
                                                    static_cast<std::uint8_t>(pkt.version >> 8),
                                                    static_cast<std::uint8_t>(pkt.version)}));
  }
  const bool reserved_annotated =
      std::any_of(annotations.begin(), annotations.end(),
                  [](const std::string& a) { return a.starts_with("reserved bits"); });
  if (pkt.reserved_bits != 0 || reserved_annotated) {
    flag(req::kReservedBits, "reserved header bits set");
  }
  auto& ledger = sender.pn[space];
  if (ledger.largest_sent && pkt.packet_number <= *ledger.largest_sent) {
    flag(req::kPnMonotonic, std::string(pn_space_name(space_of(pkt.type))) + " packet number " +
                                std::to_string(pkt.packet_number) + " after " +
                                std::to_string(*ledger.largest_sent));
  }
  if (pkt.type == PacketType::kInitial && !pkt.token.empty()) {
    if (sender.role == Role::kServer) {
      flag(req::kInitialToken, "server Initial carries a token");
    } else if (std::find(sender.tokens_received.begin(), sender.tokens_received.end(),
                         pkt.token) == sender.tokens_received.end()) {
      flag(req::kInitialToken, "client Initial carries a token the server never issued");
    }
    if (sender.role == Role::kClient) sender.sent_initial_token = true;
  }
  for (const auto& f : pkt.frames) {
    if (!allowed_at(f, pkt.type)) {
      flag(req::kFrameLevel, std::string(frame_kind_name(kind_of(f))) + " in " +
                                 std::string(packet_type_name(pkt.type)) + " packet");
    }
  }

  SentPacketInfo info;
  info.type = pkt.type;
  info.ack_eliciting = std::any_of(pkt.frames.begin(), pkt.frames.end(), ack_eliciting);
  const bool has_ack = std::any_of(pkt.frames.begin(), pkt.frames.end(),
                                   [](const Frame& f) { return kind_of(f) == FrameKind::kAck; });
  info.ack_only = has_ack && std::all_of(pkt.frames.begin(), pkt.frames.end(), [](const Frame& f) {
                    const auto k = kind_of(f);
                    return k == FrameKind::kAck || k == FrameKind::kPadding;
                  });
  info.probing = classify_probing_packet(pkt) == Probing::kProbing;
  info.src = src;
  info.dst = dst;
  ledger.sent[pkt.packet_number] = info;
  ledger.largest_sent = std::max(ledger.largest_sent.value_or(0), pkt.packet_number);
  if (!info.probing &&
      (!ledger.highest_non_probing || pkt.packet_number > ledger.highest_non_probing->packet_number)) {
    ledger.highest_non_probing = NonProbingMark{pkt.packet_number, src};
  }
  if (has_ack) {
    if (info.ack_only && ledger.unacked_eliciting == 0 && ledger.unacked_non_eliciting > 0) {
      flag(req::kAckOfAck, "ACK-only packet acknowledges only non-ack-eliciting packets");
    }
    ledger.unacked_eliciting = 0;
    ledger.unacked_non_eliciting = 0;
  }
  auto& theirs = receiver.pn[space];
  if (info.ack_eliciting) {
    ++theirs.unacked_eliciting;
  } else {
    ++theirs.unacked_non_eliciting;
  }
  return out;
}

std::vector<Verdict> frame_event(ConnectionState& state, const Frame& frame,
                                 const PacketContext& ctx) {
  std::vector<Verdict> out;
  const Endpoint s = sender_of(ctx.direction);
  FrameChecker checker{state,        ctx, out, state.at(s), state.at(other(s)),
                       allowed_at(frame, ctx.type)};
  std::visit(checker, frame);
  return out;
}

IngestResult ingest_datagram(ConnectionState& state, Direction dir, Address src, Address dst,
                             ByteSpan bytes, std::uint64_t now_ms) {
  IngestResult result;
  const auto& sender = state.at(sender_of(dir));
  DecodeContext ctx;
  ctx.short_dcid_length = state.short_dcid_length;
  for (std::size_t i = 0; i < kPnSpaceCount; ++i) ctx.largest_pn[i] = sender.pn[i].largest_sent;

  std::vector<DecodedPacket> decoded;
  try {
    decoded = decode_datagram(bytes, ctx);
  } catch (const CodecError& e) {
    result.decoded = false;
    result.verdicts.push_back(violation(req::kCodecFailure, dir, state.next_event, e.what()));
    return result;
  }

  state.now_ms = std::max(state.now_ms, now_ms);
  for (auto& d : decoded) {
    const Packet& pkt = d.packet;
    const std::uint64_t pidx = state.next_event++;
    result.events.push_back(
        ProtocolEvent{EventKind::kPacket, dir, pidx, state.now_ms, src, dst, pkt, std::nullopt});
    state.next_event = pidx;
    auto v = packet_event(state, pkt, dir, src, dst, d.annotations);
    state.next_event = pidx + 1;
    result.verdicts.insert(result.verdicts.end(), v.begin(), v.end());
    auto m = check_migration(state, pkt, dir, src, dst, state.policy);
    for (auto& verdict : m) verdict.event_index = pidx;
    result.verdicts.insert(result.verdicts.end(), m.begin(), m.end());

    for (const auto& f : pkt.frames) {
      const std::uint64_t fidx = state.next_event++;
      result.events.push_back(
          ProtocolEvent{EventKind::kFrame, dir, fidx, state.now_ms, src, dst, std::nullopt, f});
      PacketContext pc{dir, pkt.type, pkt.packet_number, src, dst, fidx};
      auto fv = frame_event(state, f, pc);
      result.verdicts.insert(result.verdicts.end(), fv.begin(), fv.end());
    }
    result.packets.push_back(pkt);
  }
  return result;
}

std::vector<Verdict> check_transport_params(const ConnectionState& state,
                                            const TransportParameterSet& set, Direction dir,
                                            std::uint64_t event_index) {
  std::vector<Verdict> out;
  auto flag = [&](std::string_view id, std::string detail) {
    out.push_back(violation(id, dir, event_index, std::move(detail)));
  };
  const Role role = state.at(sender_of(dir)).role;
  auto id_name = [](std::uint64_t id) { return "parameter 0x" + to_hex(encode_varint(id)); };

  std::set<std::uint64_t> seen;
  std::set<std::uint64_t> reported;
  for (const auto& e : set.entries()) {
    if (!seen.insert(e.id).second && reported.insert(e.id).second) {
      flag(req::kTpDup, id_name(e.id) + " appears " + std::to_string(set.count(e.id)) + " times");
    }
  }

  auto integer = [&](std::uint64_t id) -> std::optional<std::uint64_t> {
    try {
      return set.integer(id);
    } catch (const CodecError&) {
      flag(req::kTpInvalidValue, id_name(id) + " is not a single varint");
      return std::nullopt;
    }
  };
  for (const std::uint64_t id :
       {tp::kMaxIdleTimeout, tp::kMaxUdpPayloadSize, tp::kInitialMaxData,
        tp::kInitialMaxStreamDataBidiLocal, tp::kInitialMaxStreamDataBidiRemote,
        tp::kInitialMaxStreamDataUni, tp::kInitialMaxStreamsBidi, tp::kInitialMaxStreamsUni,
        tp::kAckDelayExponent, tp::kMaxAckDelay, tp::kActiveConnectionIdLimit}) {
    const auto v = integer(id);
    if (!v) continue;
    bool bad = false;
    switch (id) {
      case tp::kAckDelayExponent: bad = *v > 20; break;
      case tp::kMaxAckDelay: bad = *v >= (std::uint64_t{1} << 14); break;
      case tp::kActiveConnectionIdLimit: bad = *v < 2; break;
      case tp::kMaxUdpPayloadSize: bad = *v < 1200; break;
      case tp::kInitialMaxStreamsBidi:
      case tp::kInitialMaxStreamsUni: bad = *v > (std::uint64_t{1} << 60); break;
      default: break;
    }
    if (bad) flag(req::kTpInvalidValue, id_name(id) + " has invalid value " + std::to_string(*v));
  }
  if (const auto* e = set.find(tp::kDisableActiveMigration); e && !e->value.empty()) {
    flag(req::kTpInvalidValue, "disable_active_migration carries a value");
  }
  if (const auto* e = set.find(tp::kStatelessResetToken); e && e->value.size() != 16) {
    flag(req::kTpInvalidValue, "stateless_reset_token is " + std::to_string(e->value.size()) + " bytes");
  }
  for (const std::uint64_t id : {tp::kOriginalDestinationConnectionId,
                                 tp::kInitialSourceConnectionId, tp::kRetrySourceConnectionId}) {
    if (const auto* e = set.find(id); e && e->value.size() > ConnectionId::kMaxLength) {
      flag(req::kTpInvalidValue, id_name(id) + " carries a " + std::to_string(e->value.size()) +
                                     "-byte connection ID");
    }
  }

  if (!set.has(tp::kInitialSourceConnectionId)) {
    flag(req::kTpMissingIcid, "initial_source_connection_id absent");
  }
  if (role == Role::kServer && !set.has(tp::kOriginalDestinationConnectionId)) {
    flag(req::kTpMissingOcid, "original_destination_connection_id absent");
  }
  if (role == Role::kClient) {
    for (const std::uint64_t id : {tp::kOriginalDestinationConnectionId, tp::kPreferredAddress,
                                   tp::kStatelessResetToken, tp::kRetrySourceConnectionId}) {
      if (set.has(id)) flag(req::kTpRole, id_name(id) + " sent by a client");
    }
  }
  if (set.has(tp::kPreferredAddress)) {
    try {
      if (set.preferred_address()->cid.empty()) {
        flag(req::kTpPrefaddCid, "preferred_address with zero-length connection ID");
      }
    } catch (const CodecError& e) {
      flag(req::kTpInvalidValue, std::string("preferred_address malformed: ") + e.what());
    }
  }
  return out;
}

}  // namespace quicheck
