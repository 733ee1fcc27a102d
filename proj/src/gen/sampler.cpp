#include <algorithm>
#include <array>

#include "quicheck/errors.hpp"
#include "quicheck/gen/generator.hpp"
#include "quicheck/gen/plan.hpp"
#include "quicheck/wire/transport_params.hpp"

namespace quicheck {

namespace {

constexpr std::uint64_t kDefaultActiveCidLimit = 2;

std::uint64_t cid_limit_of(const EndpointState& e) {
  if (!e.handshake.params) return kDefaultActiveCidLimit;
  try {
    return e.handshake.params->integer(tp::kActiveConnectionIdLimit).value_or(kDefaultActiveCidLimit);
  } catch (const CodecError&) {
    return kDefaultActiveCidLimit;
  }
}

}  // namespace

bool GenerationPlan::allows(FrameKind k) const {
  return std::find(allowed.begin(), allowed.end(), k) != allowed.end();
}

double GenerationPlan::weight(FrameKind k) const {
  if (!allows(k)) return 0;
  const auto it = weights.find(k);
  return it == weights.end() ? 1.0 : it->second;
}

std::string GenerationPlan::validate() const {
  for (const auto& [k, w] : weights) {
    if (!allows(k)) return "weight given for " + std::string(frame_kind_name(k)) + " which is not allowed";
    if (w < 0) return "negative weight for " + std::string(frame_kind_name(k));
  }
  if (std::none_of(allowed.begin(), allowed.end(), [this](FrameKind k) { return weight(k) > 0; })) {
    return "no allowed frame kind has a positive weight";
  }
  if (max_frames == 0) return "max_frames is 0";
  return {};
}

bool kind_legal(FrameKind k, const GenContext& ctx) {
  const auto& me = ctx.me();
  const auto& them = ctx.them();
  const auto space = static_cast<std::size_t>(space_of(ctx.type));
  const SendQueue* q = ctx.queue;

  if (ctx.type != PacketType::kOneRtt) {
    switch (k) {
      case FrameKind::kPadding:
      case FrameKind::kPing:
        return true;
      case FrameKind::kAck:
        return me.pn[space].unacked_eliciting > 0;
      case FrameKind::kCrypto:
        return q && q->has_crypto(space_of(ctx.type));
      default:
        return false;
    }
  }

  switch (k) {
    case FrameKind::kPadding:
    case FrameKind::kPing:
    case FrameKind::kCrypto:
    case FrameKind::kMaxData:
    case FrameKind::kMaxStreams:
    case FrameKind::kDataBlocked:
    case FrameKind::kStreamsBlocked:
    case FrameKind::kPathChallenge:
      return true;
    case FrameKind::kAck:
      return me.pn[space].unacked_eliciting > 0;
    case FrameKind::kResetStream:
      return q && std::any_of(q->streams.begin(), q->streams.end(), [](const auto& e) {
               return e.second.pending() && e.second.sent > 0;
             });
    case FrameKind::kStopSending:
      return q && std::any_of(q->streams.begin(), q->streams.end(), [&](const auto& e) {
               if (!is_bidi(e.first) || e.second.sent == 0 || q->stop_sent.contains(e.first)) {
                 return false;
               }
               const auto it = me.flow.streams.find(e.first);
               return it == me.flow.streams.end() || (!it->second.reset && !it->second.final_size);
             });
    case FrameKind::kNewToken:
    case FrameKind::kHandshakeDone:
      return me.role == Role::kServer;
    case FrameKind::kStream:
      if (!q) return false;
      for (const auto& [id, s] : q->streams) {
        if (!s.pending()) continue;
        if (initiator_of(id) == me.role) {
          const auto limit = is_bidi(id) ? them.flow.max_streams_bidi : them.flow.max_streams_uni;
          if (stream_index(id) >= limit) continue;
        }
        if (s.sent == s.data.size()) return true;  // bare FIN
        const auto slimit = stream_data_limit(them, id);
        if (slimit > s.sent && them.flow.max_data > them.flow.consumed) return true;
      }
      return false;
    case FrameKind::kMaxStreamData:
    case FrameKind::kStreamDataBlocked:
      return q && !q->streams.empty();
    case FrameKind::kNewConnectionId:
      return me.cids.active_count() < cid_limit_of(them);
    case FrameKind::kRetireConnectionId:
      return std::any_of(them.cids.issued.begin(), them.cids.issued.end(), [&](const auto& e) {
        return e.first != 0 && !them.cids.retired.contains(e.first);
      });
    case FrameKind::kPathResponse:
      return !them.paths.challenges_sent.empty();
    case FrameKind::kConnectionClose:
    case FrameKind::kUnknown:
      return false;
  }
  return false;
}

FrameKind sample_frame_kind(const GenerationPlan& plan, Rng& rng, const GenContext& ctx) {
  const auto& kinds = all_frame_kinds();
  std::array<double, kFrameKindCount> w{};
  bool any = false;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const double base = plan.weight(kinds[i]);
    if (base > 0 && kind_legal(kinds[i], ctx)) {
      w[i] = base;
      any = true;
    }
  }
  if (!any) throw ExhaustionError("no allowed frame kind is legal in the current state");
  return kinds[rng.weighted(w)];
}

}  // namespace quicheck
