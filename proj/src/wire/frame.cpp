#include "quicheck/wire/frame.hpp"

#include <algorithm>

#include "quicheck/errors.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

namespace {

constexpr std::array<std::string_view, kFrameKindCount> kKindNames = {
    "PADDING",         "PING",
    "ACK",             "RESET_STREAM",
    "STOP_SENDING",    "CRYPTO",
    "NEW_TOKEN",       "STREAM",
    "MAX_DATA",        "MAX_STREAM_DATA",
    "MAX_STREAMS",     "DATA_BLOCKED",
    "STREAM_DATA_BLOCKED", "STREAMS_BLOCKED",
    "NEW_CONNECTION_ID", "RETIRE_CONNECTION_ID",
    "PATH_CHALLENGE",  "PATH_RESPONSE",
    "CONNECTION_CLOSE", "HANDSHAKE_DONE",
    "UNKNOWN",
};

constexpr std::uint8_t kStreamOff = 0x04;
constexpr std::uint8_t kStreamLen = 0x02;
constexpr std::uint8_t kStreamFin = 0x01;

// Highest type code with an assigned meaning.
constexpr std::uint64_t kLastKnownType = 0x1e;

template <std::size_t N>
std::array<std::uint8_t, N> read_array(ByteReader& r, const char* field) {
  std::array<std::uint8_t, N> out{};
  auto v = r.view(N, field);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

void put_bytes(Bytes& out, ByteSpan b) { out.insert(out.end(), b.begin(), b.end()); }

void put_cid(Bytes& out, const ConnectionId& cid) {
  if (!cid.within_limit()) {
    throw RangeError("connection id of " + std::to_string(cid.size()) +
                     " bytes exceeds 16");
  }
  out.push_back(static_cast<std::uint8_t>(cid.size()));
  put_bytes(out, cid.bytes());
}

Frame decode_body(std::uint64_t type, ByteReader& r) {
  switch (type) {
    case 0x00: {
      std::uint64_t n = 1;
      while (!r.empty() && r.peek("padding") == 0x00) {
        r.u8("padding");
        ++n;
      }
      return Padding{n};
    }
    case 0x01:
      return Ping{};
    case 0x02:
    case 0x03: {
      Ack a;
      a.largest = r.varint("ack.largest");
      a.delay = r.varint("ack.delay");
      const auto count = r.varint("ack.range_count");
      a.first_range = r.varint("ack.first_range");
      for (std::uint64_t i = 0; i < count; ++i) {
        AckRange range;
        range.gap = r.varint("ack.gap");
        range.length = r.varint("ack.range_length");
        a.ranges.push_back(range);
      }
      if (type == 0x03) {
        EcnCounts e;
        e.ect0 = r.varint("ack.ect0");
        e.ect1 = r.varint("ack.ect1");
        e.ce = r.varint("ack.ce");
        a.ecn = e;
      }
      return a;
    }
    case 0x04: {
      ResetStream f;
      f.stream_id = r.varint("reset_stream.stream_id");
      f.error_code = r.varint("reset_stream.error_code");
      f.final_size = r.varint("reset_stream.final_size");
      return f;
    }
    case 0x05: {
      StopSending f;
      f.stream_id = r.varint("stop_sending.stream_id");
      f.error_code = r.varint("stop_sending.error_code");
      return f;
    }
    case 0x06: {
      Crypto f;
      f.offset = r.varint("crypto.offset");
      const auto len = r.varint("crypto.length");
      f.data = r.bytes(len, "crypto.data");
      return f;
    }
    case 0x07: {
      NewToken f;
      const auto len = r.varint("new_token.length");
      f.token = r.bytes(len, "new_token.token");
      return f;
    }
    case 0x10:
      return MaxData{r.varint("max_data.maximum")};
    case 0x11: {
      MaxStreamData f;
      f.stream_id = r.varint("max_stream_data.stream_id");
      f.maximum = r.varint("max_stream_data.maximum");
      return f;
    }
    case 0x12:
    case 0x13:
      return MaxStreams{type == 0x12, r.varint("max_streams.maximum")};
    case 0x14:
      return DataBlocked{r.varint("data_blocked.limit")};
    case 0x15: {
      StreamDataBlocked f;
      f.stream_id = r.varint("stream_data_blocked.stream_id");
      f.limit = r.varint("stream_data_blocked.limit");
      return f;
    }
    case 0x16:
    case 0x17:
      return StreamsBlocked{type == 0x16, r.varint("streams_blocked.limit")};
    case 0x18: {
      NewConnectionId f;
      f.sequence = r.varint("new_connection_id.sequence");
      f.retire_prior_to = r.varint("new_connection_id.retire_prior_to");
      const auto len = r.u8("new_connection_id.length");
      f.cid = ConnectionId(r.bytes(len, "new_connection_id.cid"));
      f.reset_token = read_array<16>(r, "new_connection_id.reset_token");
      return f;
    }
    case 0x19:
      return RetireConnectionId{r.varint("retire_connection_id.sequence")};
    case 0x1a:
      return PathChallenge{read_array<8>(r, "path_challenge.data")};
    case 0x1b:
      return PathResponse{read_array<8>(r, "path_response.data")};
    case 0x1c:
    case 0x1d: {
      ConnectionClose f;
      f.application = type == 0x1d;
      f.error_code = r.varint("connection_close.error_code");
      if (!f.application) f.frame_type = r.varint("connection_close.frame_type");
      const auto len = r.varint("connection_close.reason_length");
      f.reason = r.bytes(len, "connection_close.reason");
      return f;
    }
    case 0x1e:
      return HandshakeDone{};
    default:
      break;
  }
  if (type >= 0x08 && type <= 0x0f) {
    Stream f;
    f.stream_id = r.varint("stream.stream_id");
    if (type & kStreamOff) f.offset = r.varint("stream.offset");
    f.fin = (type & kStreamFin) != 0;
    if (type & kStreamLen) {
      const auto len = r.varint("stream.length");
      f.data = r.bytes(len, "stream.data");
    } else {
      f.data = r.rest();
    }
    return f;
  }
  UnknownFrame f;
  f.type = type;
  const auto len = r.varint("unknown.body_length");
  f.body = r.bytes(len, "unknown.body");
  return f;
}

}  // namespace

std::string_view frame_kind_name(FrameKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

std::optional<FrameKind> frame_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<FrameKind>(i);
  }
  return std::nullopt;
}

const std::array<FrameKind, kFrameKindCount>& all_frame_kinds() {
  static const auto kinds = [] {
    std::array<FrameKind, kFrameKindCount> out{};
    for (std::size_t i = 0; i < kFrameKindCount; ++i) out[i] = static_cast<FrameKind>(i);
    return out;
  }();
  return kinds;
}

FrameKind kind_of(const Frame& frame) {
  // Variant alternatives are declared in FrameKind order.
  return static_cast<FrameKind>(frame.index());
}

std::uint64_t frame_type_code(const Frame& frame) {
  return std::visit(
      [](const auto& f) -> std::uint64_t {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Padding>) return 0x00;
        else if constexpr (std::is_same_v<T, Ping>) return 0x01;
        else if constexpr (std::is_same_v<T, Ack>) return f.ecn ? 0x03 : 0x02;
        else if constexpr (std::is_same_v<T, ResetStream>) return 0x04;
        else if constexpr (std::is_same_v<T, StopSending>) return 0x05;
        else if constexpr (std::is_same_v<T, Crypto>) return 0x06;
        else if constexpr (std::is_same_v<T, NewToken>) return 0x07;
        else if constexpr (std::is_same_v<T, Stream>)
          return 0x08 | kStreamLen | (f.offset != 0 ? kStreamOff : 0) | (f.fin ? kStreamFin : 0);
        else if constexpr (std::is_same_v<T, MaxData>) return 0x10;
        else if constexpr (std::is_same_v<T, MaxStreamData>) return 0x11;
        else if constexpr (std::is_same_v<T, MaxStreams>) return f.bidi ? 0x12 : 0x13;
        else if constexpr (std::is_same_v<T, DataBlocked>) return 0x14;
        else if constexpr (std::is_same_v<T, StreamDataBlocked>) return 0x15;
        else if constexpr (std::is_same_v<T, StreamsBlocked>) return f.bidi ? 0x16 : 0x17;
        else if constexpr (std::is_same_v<T, NewConnectionId>) return 0x18;
        else if constexpr (std::is_same_v<T, RetireConnectionId>) return 0x19;
        else if constexpr (std::is_same_v<T, PathChallenge>) return 0x1a;
        else if constexpr (std::is_same_v<T, PathResponse>) return 0x1b;
        else if constexpr (std::is_same_v<T, ConnectionClose>) return f.application ? 0x1d : 0x1c;
        else if constexpr (std::is_same_v<T, HandshakeDone>) return 0x1e;
        else return f.type;
      },
      frame);
}

DecodedFrame decode_frame(ByteSpan bytes, std::size_t base_offset) {
  ByteReader r(bytes, base_offset);
  const auto type = r.varint("frame.type");
  Frame frame = decode_body(type, r);
  return {std::move(frame), r.position()};
}

void append_frame(Bytes& out, const Frame& frame) {
  const auto type = frame_type_code(frame);
  if (std::holds_alternative<Padding>(frame)) {
    const auto n = std::get<Padding>(frame).length;
    if (n == 0) throw RangeError("PADDING length must be at least 1");
    out.insert(out.end(), n, 0x00);
    return;
  }
  if (auto* u = std::get_if<UnknownFrame>(&frame); u && u->type <= kLastKnownType) {
    throw RangeError("unknown frame type code collides with an assigned type");
  }
  append_varint(out, type);
  std::visit(
      [&out](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Ack>) {
          append_varint(out, f.largest);
          append_varint(out, f.delay);
          append_varint(out, f.ranges.size());
          append_varint(out, f.first_range);
          for (const auto& r : f.ranges) {
            append_varint(out, r.gap);
            append_varint(out, r.length);
          }
          if (f.ecn) {
            append_varint(out, f.ecn->ect0);
            append_varint(out, f.ecn->ect1);
            append_varint(out, f.ecn->ce);
          }
        } else if constexpr (std::is_same_v<T, ResetStream>) {
          append_varint(out, f.stream_id);
          append_varint(out, f.error_code);
          append_varint(out, f.final_size);
        } else if constexpr (std::is_same_v<T, StopSending>) {
          append_varint(out, f.stream_id);
          append_varint(out, f.error_code);
        } else if constexpr (std::is_same_v<T, Crypto>) {
          append_varint(out, f.offset);
          append_varint(out, f.data.size());
          put_bytes(out, f.data);
        } else if constexpr (std::is_same_v<T, NewToken>) {
          append_varint(out, f.token.size());
          put_bytes(out, f.token);
        } else if constexpr (std::is_same_v<T, Stream>) {
          if (f.offset + f.data.size() > kVarIntMax) {
            throw RangeError("STREAM offset + length exceeds 2^62-1");
          }
          append_varint(out, f.stream_id);
          if (f.offset != 0) append_varint(out, f.offset);
          append_varint(out, f.data.size());
          put_bytes(out, f.data);
        } else if constexpr (std::is_same_v<T, MaxData>) {
          append_varint(out, f.maximum);
        } else if constexpr (std::is_same_v<T, MaxStreamData>) {
          append_varint(out, f.stream_id);
          append_varint(out, f.maximum);
        } else if constexpr (std::is_same_v<T, MaxStreams>) {
          append_varint(out, f.maximum);
        } else if constexpr (std::is_same_v<T, DataBlocked>) {
          append_varint(out, f.limit);
        } else if constexpr (std::is_same_v<T, StreamDataBlocked>) {
          append_varint(out, f.stream_id);
          append_varint(out, f.limit);
        } else if constexpr (std::is_same_v<T, StreamsBlocked>) {
          append_varint(out, f.limit);
        } else if constexpr (std::is_same_v<T, NewConnectionId>) {
          append_varint(out, f.sequence);
          append_varint(out, f.retire_prior_to);
          put_cid(out, f.cid);
          put_bytes(out, f.reset_token);
        } else if constexpr (std::is_same_v<T, RetireConnectionId>) {
          append_varint(out, f.sequence);
        } else if constexpr (std::is_same_v<T, PathChallenge> ||
                             std::is_same_v<T, PathResponse>) {
          put_bytes(out, f.data);
        } else if constexpr (std::is_same_v<T, ConnectionClose>) {
          append_varint(out, f.error_code);
          if (!f.application) append_varint(out, f.frame_type);
          append_varint(out, f.reason.size());
          put_bytes(out, f.reason);
        } else if constexpr (std::is_same_v<T, UnknownFrame>) {
          append_varint(out, f.body.size());
          put_bytes(out, f.body);
        }
      },
      frame);
}

Bytes encode_frame(const Frame& frame) {
  Bytes out;
  append_frame(out, frame);
  return out;
}

std::optional<std::vector<PacketNumberInterval>> ack_intervals(const Ack& ack) {
  std::vector<PacketNumberInterval> out;
  if (ack.first_range > ack.largest) return std::nullopt;
  std::uint64_t high = ack.largest;
  std::uint64_t low = ack.largest - ack.first_range;
  out.push_back({low, high});
  for (const auto& r : ack.ranges) {
    // Next high = low - gap - 2.
    if (low < r.gap + 2) return std::nullopt;
    high = low - r.gap - 2;
    if (r.length > high) return std::nullopt;
    low = high - r.length;
    out.push_back({low, high});
  }
  return out;
}

Ack make_ack(const std::vector<PacketNumberInterval>& ascending, std::uint64_t delay) {
  Ack ack;
  ack.delay = delay;
  if (ascending.empty()) return ack;
  auto it = ascending.rbegin();
  ack.largest = it->high;
  ack.first_range = it->high - it->low;
  std::uint64_t prev_low = it->low;
  for (++it; it != ascending.rend(); ++it) {
    AckRange r;
    r.gap = prev_low - it->high - 2;
    r.length = it->high - it->low;
    ack.ranges.push_back(r);
    prev_low = it->low;
  }
  return ack;
}

}  // namespace quicheck
