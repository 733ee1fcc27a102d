#include <algorithm>
#include <iterator>

#include "quicheck/engine/monitor.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/gen/generator.hpp"
#include "quicheck/wire/handshake_messages.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

namespace {

constexpr std::uint64_t kMaxStreamCount = std::uint64_t{1} << 60;
// Short header with an 8-byte DCID and the 2-byte packet number, plus slack.
constexpr std::size_t kHeaderReserve = 24;

template <typename It>
It pick(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(std::distance(first, last));
  std::advance(first, static_cast<std::ptrdiff_t>(rng.uniform(0, n - 1)));
  return first;
}

template <typename Pred>
std::uint64_t pick_stream(const SendQueue& q, Rng& rng, Pred pred) {
  std::vector<std::uint64_t> ids;
  for (const auto& [id, s] : q.streams) {
    if (pred(id, s)) ids.push_back(id);
  }
  if (ids.empty()) throw ExhaustionError("no eligible stream");
  return *pick(ids.begin(), ids.end(), rng);
}

Frame draw(FrameKind k, const GenContext& ctx, Rng& rng, std::size_t budget) {
  const auto& me = ctx.me();
  const auto& them = ctx.them();
  const SendQueue* q = ctx.queue;
  switch (k) {
    case FrameKind::kPadding:
      return Padding{rng.uniform(1, std::clamp<std::size_t>(budget, 1, 32))};
    case FrameKind::kPing:
      return Ping{};
    case FrameKind::kAck: {
      auto ack = ack_for(ctx.state, ctx.self, space_of(ctx.type), rng.uniform(0, 1000));
      if (!ack) throw ExhaustionError("nothing to acknowledge");
      return *ack;
    }
    case FrameKind::kResetStream: {
      const auto id = pick_stream(*q, rng, [](auto, const StreamOutbox& s) {
        return s.pending() && s.sent > 0;
      });
      return ResetStream{id, rng.uniform(0, 255), q->streams.at(id).sent};
    }
    case FrameKind::kStopSending: {
      const auto id = pick_stream(*q, rng, [&](std::uint64_t sid, const StreamOutbox& s) {
        if (!is_bidi(sid) || s.sent == 0 || q->stop_sent.contains(sid)) return false;
        const auto it = me.flow.streams.find(sid);
        return it == me.flow.streams.end() || (!it->second.reset && !it->second.final_size);
      });
      return StopSending{id, rng.uniform(0, 255)};
    }
    case FrameKind::kCrypto: {
      const auto space = space_of(ctx.type);
      if (ctx.type != PacketType::kOneRtt) {
        const auto i = static_cast<std::size_t>(space);
        return Crypto{q->crypto_offset[i], q->crypto[i]};
      }
      const auto body = rng.bytes(rng.uniform(8, 32));
      return Crypto{me.handshake.crypto[static_cast<std::size_t>(space)].contiguous_end(),
                    encode_handshake_message({HandshakeMessageType::kNewSessionTicket, body})};
    }
    case FrameKind::kNewToken:
      return NewToken{rng.bytes(rng.uniform(8, 32))};
    case FrameKind::kStream: {
      const auto id = pick_stream(*q, rng, [&](std::uint64_t sid, const StreamOutbox& s) {
        if (!s.pending()) return false;
        if (initiator_of(sid) == me.role) {
          const auto limit = is_bidi(sid) ? them.flow.max_streams_bidi : them.flow.max_streams_uni;
          if (stream_index(sid) >= limit) return false;
        }
        if (s.sent == s.data.size()) return true;
        return stream_data_limit(them, sid) > s.sent && them.flow.max_data > them.flow.consumed;
      });
      const auto& s = q->streams.at(id);
      const std::uint64_t available = s.data.size() - s.sent;
      Stream f{id, s.sent, false, {}};
      if (available > 0) {
        const std::uint64_t credit = std::min(stream_data_limit(them, id) - s.sent,
                                              them.flow.max_data - them.flow.consumed);
        const std::uint64_t room = budget > 24 ? budget - 24 : 1;
        const std::uint64_t len = rng.uniform(1, std::min({available, credit, room}));
        const auto begin = s.data.begin() + static_cast<std::ptrdiff_t>(s.sent);
        f.data.assign(begin, begin + static_cast<std::ptrdiff_t>(len));
      }
      f.fin = s.sent + f.data.size() == s.data.size();
      return f;
    }
    case FrameKind::kMaxData:
      return MaxData{me.flow.max_data + rng.uniform(1024, 65536)};
    case FrameKind::kMaxStreamData: {
      const auto id = pick_stream(*q, rng, [](auto, const auto&) { return true; });
      return MaxStreamData{id, stream_data_limit(me, id) + rng.uniform(1024, 65536)};
    }
    case FrameKind::kMaxStreams: {
      const bool bidi = rng.chance(0.5);
      const auto current = bidi ? me.flow.max_streams_bidi : me.flow.max_streams_uni;
      return MaxStreams{bidi, std::min(kMaxStreamCount, current + rng.uniform(1, 10))};
    }
    case FrameKind::kDataBlocked:
      return DataBlocked{them.flow.max_data};
    case FrameKind::kStreamDataBlocked: {
      const auto id = pick_stream(*q, rng, [](auto, const auto&) { return true; });
      return StreamDataBlocked{id, stream_data_limit(them, id)};
    }
    case FrameKind::kStreamsBlocked: {
      const bool bidi = rng.chance(0.5);
      return StreamsBlocked{bidi, bidi ? them.flow.max_streams_bidi : them.flow.max_streams_uni};
    }
    case FrameKind::kNewConnectionId: {
      NewConnectionId f;
      f.sequence = me.cids.highest_sequence.value_or(0) + 1;
      f.retire_prior_to = me.cids.retire_prior_to;
      f.cid = ConnectionId(rng.bytes(8));
      f.reset_token = rng.array<16>();
      return f;
    }
    case FrameKind::kRetireConnectionId: {
      std::vector<std::uint64_t> seqs;
      for (const auto& [seq, cid] : them.cids.issued) {
        if (seq != 0 && !them.cids.retired.contains(seq)) seqs.push_back(seq);
      }
      if (seqs.empty()) throw ExhaustionError("no connection ID to retire");
      return RetireConnectionId{*pick(seqs.begin(), seqs.end(), rng)};
    }
    case FrameKind::kPathChallenge:
      return PathChallenge{rng.array<8>()};
    case FrameKind::kPathResponse: {
      const auto& ch = them.paths.challenges_sent;
      if (ch.empty()) throw ExhaustionError("no pending PATH_CHALLENGE");
      return PathResponse{pick(ch.begin(), ch.end(), rng)->first};
    }
    case FrameKind::kHandshakeDone:
      return HandshakeDone{};
    case FrameKind::kConnectionClose:
    case FrameKind::kUnknown:
      break;
  }
  throw ExhaustionError(std::string(frame_kind_name(k)) + " is never generated at random");
}

}  // namespace

void note_sent(SendQueue& q, const Frame& f, PacketType type) {
  if (const auto* s = std::get_if<Stream>(&f)) {
    auto& out = q.streams.at(s->stream_id);
    out.sent = std::max(out.sent, s->offset + s->data.size());
    if (s->fin) out.fin_sent = true;
  } else if (const auto* r = std::get_if<ResetStream>(&f)) {
    if (auto it = q.streams.find(r->stream_id); it != q.streams.end()) it->second.reset = true;
  } else if (const auto* st = std::get_if<StopSending>(&f)) {
    q.stop_sent.insert(st->stream_id);
  } else if (const auto* c = std::get_if<Crypto>(&f); c && type != PacketType::kOneRtt) {
    const auto i = static_cast<std::size_t>(space_of(type));
    q.crypto_offset[i] += q.crypto[i].size();
    q.crypto[i].clear();
  }
}

void SendQueue::push_crypto(PnSpace s, const Bytes& data) {
  auto& buf = crypto[static_cast<std::size_t>(s)];
  buf.insert(buf.end(), data.begin(), data.end());
}

void SendQueue::add_stream(std::uint64_t stream_id, Bytes data) {
  streams[stream_id] = StreamOutbox{std::move(data), 0, false, false};
}

std::optional<Ack> ack_for(const ConnectionState& state, Endpoint self, PnSpace space,
                           std::uint64_t delay) {
  const auto& sent = state.at(other(self)).pn[static_cast<std::size_t>(space)].sent;
  if (sent.empty()) return std::nullopt;
  std::vector<PacketNumberInterval> runs;
  for (const auto& [pn, info] : sent) {
    if (!runs.empty() && runs.back().high + 1 == pn) {
      runs.back().high = pn;
    } else {
      runs.push_back({pn, pn});
    }
  }
  constexpr std::size_t kMaxRanges = 32;
  if (runs.size() > kMaxRanges) runs.erase(runs.begin(), runs.end() - kMaxRanges);
  return make_ack(runs, delay);
}

std::uint64_t next_packet_number(const ConnectionState& state, Endpoint self, PnSpace space) {
  const auto& largest = state.at(self).pn[static_cast<std::size_t>(space)].largest_sent;
  return largest ? *largest + 1 : 0;
}

Frame synthesize_frame(FrameKind k, const GenContext& ctx, Rng& rng, std::size_t budget,
                       std::size_t max_retries) {
  if (!kind_legal(k, ctx)) {
    throw ExhaustionError(std::string(frame_kind_name(k)) + " is not legal in the current state");
  }
  for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
    Frame f = draw(k, ctx, rng, budget);
    if (encode_frame(f).size() <= budget) return f;
  }
  throw ExhaustionError("could not fit a " + std::string(frame_kind_name(k)) + " frame into " +
                        std::to_string(budget) + " bytes");
}

Packet build_packet(const GenContext& ctx, const GenerationPlan& plan, Rng& rng,
                    const HeaderTemplate& header) {
  Packet p;
  p.type = ctx.type;
  p.version = header.version;
  p.dcid = header.dcid;
  if (p.form() == HeaderForm::kLong) p.scid = header.scid;
  if (p.type == PacketType::kInitial) p.token = header.token;
  const auto space = space_of(ctx.type);
  p.packet_number = next_packet_number(ctx.state, ctx.self, space);

  if (ctx.type != PacketType::kOneRtt) {
    if (kind_legal(FrameKind::kAck, ctx)) p.frames.push_back(draw(FrameKind::kAck, ctx, rng, 0));
    if (ctx.queue && ctx.queue->has_crypto(space)) {
      Frame c = draw(FrameKind::kCrypto, ctx, rng, 0);
      note_sent(*ctx.queue, c, ctx.type);
      p.frames.push_back(std::move(c));
    }
    if (p.frames.empty()) throw ExhaustionError("nothing to send at this encryption level");
    return p;
  }

  ConnectionState scratch = ctx.state;
  SendQueue queue = ctx.queue ? *ctx.queue : SendQueue{};
  const std::size_t budget = plan.max_datagram > kHeaderReserve ? plan.max_datagram - kHeaderReserve : 0;
  std::size_t used = 0;
  const auto count = rng.uniform(1, plan.max_frames);
  for (std::uint64_t i = 0; i < count && used < budget; ++i) {
    GenContext sc{scratch, ctx.self, ctx.type, &queue};
    Frame f;
    try {
      const auto k = sample_frame_kind(plan, rng, sc);
      f = synthesize_frame(k, sc, rng, budget - used, plan.max_retries);
    } catch (const ExhaustionError&) {
      if (i == 0) throw;
      break;
    }
    used += encode_frame(f).size();
    note_sent(queue, f, ctx.type);
    frame_event(scratch, f,
                PacketContext{direction_of(ctx.self), ctx.type, p.packet_number, {}, {}, 0});
    p.frames.push_back(std::move(f));
  }
  if (p.frames.empty()) throw ExhaustionError("frame budget of " + std::to_string(budget) + " bytes is empty");
  if (ctx.queue) *ctx.queue = std::move(queue);
  return p;
}

}  // namespace quicheck
