#include "quicheck/wire/packet.hpp"

#include "quicheck/errors.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

namespace {

constexpr std::size_t kPnLength = 2;

void put_cid(Bytes& out, const ConnectionId& cid) {
  if (!cid.within_limit()) {
    throw RangeError("connection id of " + std::to_string(cid.size()) +
                     " bytes exceeds 16");
  }
  out.push_back(static_cast<std::uint8_t>(cid.size()));
  out.insert(out.end(), cid.bytes().begin(), cid.bytes().end());
}

Bytes encode_payload(const Packet& p) {
  if (p.frames.empty()) throw RangeError("packet must carry at least one frame");
  Bytes payload;
  for (const auto& f : p.frames) append_frame(payload, f);
  return payload;
}

std::vector<Frame> decode_frames(ByteSpan payload, std::size_t base) {
  std::vector<Frame> frames;
  std::size_t pos = 0;
  while (pos < payload.size()) {
    auto d = decode_frame(payload.subspan(pos), base + pos);
    pos += d.consumed;
    frames.push_back(std::move(d.frame));
  }
  if (frames.empty()) {
    throw CodecError(CodecError::Kind::kMalformed, base, "payload");
  }
  return frames;
}

}  // namespace

std::string_view packet_type_name(PacketType t) {
  switch (t) {
    case PacketType::kInitial: return "initial";
    case PacketType::kZeroRtt: return "0rtt";
    case PacketType::kHandshake: return "handshake";
    case PacketType::kOneRtt: return "1rtt";
  }
  return "?";
}

std::string_view pn_space_name(PnSpace s) {
  switch (s) {
    case PnSpace::kInitial: return "initial";
    case PnSpace::kHandshake: return "handshake";
    case PnSpace::kApplication: return "application";
  }
  return "?";
}

PnSpace space_of(PacketType t) {
  switch (t) {
    case PacketType::kInitial: return PnSpace::kInitial;
    case PacketType::kHandshake: return PnSpace::kHandshake;
    default: return PnSpace::kApplication;
  }
}

std::uint64_t expand_packet_number(std::optional<std::uint64_t> largest,
                                   std::uint64_t truncated, std::size_t pn_bytes) {
  if (!largest) return truncated;
  const std::uint64_t expected = *largest + 1;
  const std::uint64_t win = std::uint64_t{1} << (pn_bytes * 8);
  const std::uint64_t hwin = win / 2;
  const std::uint64_t mask = win - 1;
  const std::uint64_t candidate = (expected & ~mask) | truncated;
  if (candidate + hwin <= expected && candidate < (std::uint64_t{1} << 62) - win) {
    return candidate + win;
  }
  if (candidate > expected + hwin && candidate >= win) return candidate - win;
  return candidate;
}

DecodedPacket decode_packet(ByteSpan bytes, const DecodeContext& ctx,
                            std::size_t base_offset) {
  ByteReader r(bytes, base_offset);
  DecodedPacket out;
  Packet& p = out.packet;
  const std::uint8_t first = r.u8("header.first_byte");
  if ((first & 0x40) == 0) out.annotations.emplace_back("fixed bit cleared");
  const std::size_t pn_len = (first & 0x03) + 1u;
  if (pn_len != kPnLength) {
    out.annotations.push_back("packet number length " + std::to_string(pn_len));
  }

  std::size_t payload_end = 0;
  if (first & 0x80) {
    const auto long_type = (first >> 4) & 0x03;
    if (long_type == 3) {
      throw CodecError(CodecError::Kind::kMalformed, base_offset, "header.retry_unsupported");
    }
    p.type = long_type == 0 ? PacketType::kInitial
             : long_type == 1 ? PacketType::kZeroRtt
                              : PacketType::kHandshake;
    p.reserved_bits = (first >> 2) & 0x03;
    p.version = r.u32("header.version");
    if (p.version != ctx.pinned_version) {
      out.annotations.push_back("unexpected version " + std::to_string(p.version));
    }
    const auto dlen = r.u8("header.dcid_length");
    p.dcid = ConnectionId(r.bytes(dlen, "header.dcid"));
    const auto slen = r.u8("header.scid_length");
    p.scid = ConnectionId(r.bytes(slen, "header.scid"));
    if (p.type == PacketType::kInitial) {
      const auto tlen = r.varint("header.token_length");
      p.token = r.bytes(tlen, "header.token");
    }
    const auto length = r.varint("header.length");
    if (length < pn_len || length > r.remaining()) {
      throw CodecError(CodecError::Kind::kTruncated, r.absolute_offset(), "header.length");
    }
    payload_end = r.position() + length;
  } else {
    p.type = PacketType::kOneRtt;
    p.spin = (first & 0x20) != 0;
    p.reserved_bits = (first >> 3) & 0x03;
    p.key_phase = (first & 0x04) != 0;
    p.dcid = ConnectionId(r.bytes(ctx.short_dcid_length, "header.dcid"));
    payload_end = bytes.size();
  }
  if (p.reserved_bits != 0) out.annotations.emplace_back("reserved bits set");

  std::uint64_t truncated = 0;
  for (std::size_t i = 0; i < pn_len; ++i) truncated = (truncated << 8) | r.u8("header.packet_number");
  p.packet_number = expand_packet_number(
      ctx.largest_pn[static_cast<std::size_t>(space_of(p.type))], truncated, pn_len);

  const std::size_t payload_start = r.position();
  p.frames = decode_frames(bytes.subspan(payload_start, payload_end - payload_start),
                           base_offset + payload_start);
  out.consumed = payload_end;
  return out;
}

std::vector<DecodedPacket> decode_datagram(ByteSpan bytes, const DecodeContext& ctx) {
  std::vector<DecodedPacket> out;
  std::size_t pos = 0;
  DecodeContext local = ctx;
  while (pos < bytes.size()) {
    auto d = decode_packet(bytes.subspan(pos), local, pos);
    pos += d.consumed;
    out.push_back(std::move(d));
  }
  if (out.empty()) throw CodecError(CodecError::Kind::kTruncated, 0, "datagram");
  return out;
}

Bytes encode_packet(const Packet& p) {
  Bytes out;
  const Bytes payload = encode_payload(p);
  const std::uint16_t pn = static_cast<std::uint16_t>(p.packet_number & 0xffff);
  const std::uint8_t reserved = p.reserved_bits & 0x03;
  if (p.form() == HeaderForm::kLong) {
    const std::uint8_t long_type = p.type == PacketType::kInitial   ? 0
                                   : p.type == PacketType::kZeroRtt ? 1
                                                                    : 2;
    out.push_back(static_cast<std::uint8_t>(0xc0 | long_type << 4 | reserved << 2 |
                                            (kPnLength - 1)));
    append_u32(out, p.version);
    put_cid(out, p.dcid);
    put_cid(out, p.scid);
    if (p.type == PacketType::kInitial) {
      append_varint(out, p.token.size());
      out.insert(out.end(), p.token.begin(), p.token.end());
    }
    append_varint(out, kPnLength + payload.size());
  } else {
    if (!p.dcid.within_limit()) {
      throw RangeError("connection id of " + std::to_string(p.dcid.size()) +
                       " bytes exceeds 16");
    }
    out.push_back(static_cast<std::uint8_t>(0x40 | (p.spin ? 0x20 : 0) | reserved << 3 |
                                            (p.key_phase ? 0x04 : 0) | (kPnLength - 1)));
    out.insert(out.end(), p.dcid.bytes().begin(), p.dcid.bytes().end());
  }
  append_u16(out, pn);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes encode_datagram(const std::vector<Packet>& packets) {
  Bytes out;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (packets[i].form() == HeaderForm::kShort && i + 1 != packets.size()) {
      throw RangeError("a short-header packet must be last in its datagram");
    }
    auto b = encode_packet(packets[i]);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace quicheck
