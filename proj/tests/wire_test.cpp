#include <gtest/gtest.h>

#include "quicheck/errors.hpp"
#include "quicheck/wire/frame.hpp"
#include "quicheck/wire/packet.hpp"
#include "quicheck/wire/transport_params.hpp"
#include "quicheck/wire/varint.hpp"
#include "support.hpp"

using namespace quicheck;

namespace {

// Straight from the bit layout: 2-bit length prefix, big-endian body.
Bytes reference_varint(std::uint64_t v) {
  int len = v < 64 ? 1 : v < 16384 ? 2 : v < (1ULL << 30) ? 4 : 8;
  const std::uint64_t prefix = len == 1 ? 0 : len == 2 ? 1 : len == 4 ? 2 : 3;
  Bytes out(len);
  for (int i = len - 1; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  out[0] |= static_cast<std::uint8_t>(prefix << 6);
  return out;
}

}  // namespace

TEST(Varint, SmallestValues) {
  EXPECT_EQ(encode_varint(0), (Bytes{0x00}));
  EXPECT_EQ(encode_varint(63), (Bytes{0x3f}));
  EXPECT_EQ(encode_varint(15293), (Bytes{0x7b, 0xbd}));
}

TEST(Varint, DecodeExamples) {
  const Bytes one{0x00};
  auto d = decode_varint(one);
  EXPECT_EQ(d.value, 0u);
  EXPECT_EQ(d.consumed, 1u);

  const Bytes four{0x9d, 0x7f, 0x3e, 0x7d};
  d = decode_varint(four);
  EXPECT_EQ(d.value, 494878333u);
  EXPECT_EQ(d.consumed, 4u);
}

TEST(Varint, TruncatedTwoByteClass) {
  const Bytes b{0x40};
  try {
    decode_varint(b);
    FAIL() << "expected truncation";
  } catch (const CodecError& e) {
    EXPECT_EQ(e.kind(), CodecError::Kind::kTruncated);
  }
}

TEST(Varint, MinimalLengthBelow16Bits) {
  for (std::uint64_t v = 0; v < (1u << 16); ++v) {
    const Bytes enc = encode_varint(v);
    ASSERT_EQ(enc, reference_varint(v)) << v;
    const auto d = decode_varint(enc);
    ASSERT_EQ(d.value, v);
    ASSERT_EQ(d.consumed, enc.size());
  }
}

TEST(Varint, ClassBoundaries) {
  for (std::uint64_t v : std::initializer_list<std::uint64_t>{63ULL, 64ULL, 16383ULL, 16384ULL, (1ULL << 30) - 1, 1ULL << 30,
                          kVarIntMax}) {
    EXPECT_EQ(encode_varint(v), reference_varint(v)) << v;
    EXPECT_EQ(decode_varint(encode_varint(v)).value, v);
  }
  EXPECT_THROW(encode_varint(1ULL << 62), RangeError);
  EXPECT_THROW(encode_varint(~0ULL), RangeError);
}

TEST(Frame, PaddingAndPing) {
  const Bytes pad{0x00};
  auto d = decode_frame(pad);
  EXPECT_TRUE(std::holds_alternative<Padding>(d.frame));
  EXPECT_EQ(d.consumed, 1u);
  EXPECT_EQ(encode_frame(Padding{}), pad);

  const Bytes ping{0x01};
  d = decode_frame(ping);
  EXPECT_TRUE(std::holds_alternative<Ping>(d.frame));
  EXPECT_EQ(d.consumed, 1u);
}

TEST(Frame, UnknownTypeKept) {
  const Bytes raw = encode_frame(UnknownFrame{0x21, Bytes{1, 2, 3}});
  EXPECT_EQ(raw.front(), 0x21);
  const auto d = decode_frame(raw);
  ASSERT_TRUE(std::holds_alternative<UnknownFrame>(d.frame));
  EXPECT_EQ(std::get<UnknownFrame>(d.frame).type, 0x21u);
  EXPECT_EQ(std::get<UnknownFrame>(d.frame).body, (Bytes{1, 2, 3}));
  EXPECT_THROW(encode_frame(UnknownFrame{0x06, {}}), RangeError);
}

TEST(Frame, EmptyNewTokenHasZeroLength) {
  const Bytes raw = encode_frame(NewToken{});
  EXPECT_EQ(raw, (Bytes{0x07, 0x00}));
  EXPECT_EQ(decode_frame(raw).frame, Frame(NewToken{}));
}

TEST(Frame, StreamWithFin) {
  const Frame f = Stream{0, 0, true, to_bytes("hi")};
  const Bytes raw = encode_frame(f);
  EXPECT_EQ(decode_frame(raw).frame, f);
  EXPECT_EQ(decode_frame(raw).consumed, raw.size());
}

TEST(Frame, TruncatedFieldIsNamed) {
  Bytes raw = encode_frame(MaxStreamData{4, 100000});
  raw.pop_back();
  try {
    decode_frame(raw);
    FAIL();
  } catch (const CodecError& e) {
    EXPECT_EQ(e.kind(), CodecError::Kind::kTruncated);
    EXPECT_FALSE(e.field().empty());
  }
}

TEST(Frame, OversizedConnectionIdRejectedOnEncode) {
  EXPECT_THROW(encode_frame(NewConnectionId{1, 0, ConnectionId(Bytes(17, 1)), {}}), RangeError);
}

TEST(Frame, RandomRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const Frame f = support::random_frame(rng);
    const Bytes raw = encode_frame(f);
    const auto d = decode_frame(raw);
    ASSERT_EQ(d.frame, f) << i;
    ASSERT_EQ(d.consumed, raw.size());
    ASSERT_EQ(encode_frame(d.frame), raw);
  }
}

TEST(Packet, InitialVersionAndToken) {
  Packet p;
  p.type = PacketType::kInitial;
  p.dcid = ConnectionId(Bytes(8, 0xaa));
  p.scid = ConnectionId(Bytes(4, 0xbb));
  p.token = Bytes{1, 2, 3, 4, 5, 6, 7};
  p.packet_number = 3;
  p.frames = {Ping{}};
  const auto d = decode_packet(encode_packet(p), DecodeContext{});
  EXPECT_EQ(d.packet.form(), HeaderForm::kLong);
  EXPECT_EQ(d.packet.type, PacketType::kInitial);
  EXPECT_EQ(d.packet.version, 0xff00001du);
  EXPECT_EQ(d.packet.token.size(), 7u);
  EXPECT_EQ(d.packet, p);
}

TEST(Packet, ShortHeaderDcidFromContext) {
  Packet p;
  p.dcid = ConnectionId(Bytes(8, 0x42));
  p.frames = {Ping{}};
  DecodeContext ctx;
  ctx.short_dcid_length = 8;
  const auto d = decode_packet(encode_packet(p), ctx);
  EXPECT_EQ(d.packet.dcid.size(), 8u);
  EXPECT_EQ(d.packet, p);
}

TEST(Packet, EmptyInitialTokenLengthZero) {
  Packet p;
  p.type = PacketType::kInitial;
  p.frames = {Ping{}};
  const Bytes raw = encode_packet(p);
  // flags, version, dcid len 0, scid len 0, token length
  EXPECT_EQ(raw[5], 0);
  EXPECT_EQ(raw[6], 0);
  EXPECT_EQ(raw[7], 0);
}

TEST(Packet, RandomRoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const Packet p = support::random_packet(rng);
    const Bytes raw = encode_packet(p);
    const auto d = decode_packet(raw, DecodeContext{});
    ASSERT_EQ(d.packet, p) << i;
    ASSERT_EQ(d.consumed, raw.size());
    ASSERT_EQ(encode_packet(d.packet), raw);
  }
}

TEST(Packet, CoalescedDatagram) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<Packet> ps;
    for (auto n = rng.uniform(1, 3); n > 0; --n) {
      Packet p = support::random_packet(rng);
      if (p.form() == HeaderForm::kShort) p.type = PacketType::kHandshake;
      ps.push_back(std::move(p));
    }
    const auto decoded = decode_datagram(encode_datagram(ps), DecodeContext{});
    ASSERT_EQ(decoded.size(), ps.size());
    for (std::size_t k = 0; k < ps.size(); ++k) {
      // Types were switched without adding an scid; compare the re-encoding.
      ASSERT_EQ(encode_packet(decoded[k].packet), encode_packet(ps[k]));
    }
  }
}

TEST(TransportParams, UnknownIdRetained) {
  TransportParameterSet s;
  s.set_integer(tp::kMaxIdleTimeout, 30000);
  s.append(0x1f3a, Bytes{9, 8, 7});
  const Bytes raw = encode_transport_params(s);
  const auto back = decode_transport_params(raw);
  ASSERT_TRUE(back.has(0x1f3a));
  EXPECT_EQ(back.find(0x1f3a)->value, (Bytes{9, 8, 7}));
  EXPECT_EQ(encode_transport_params(back), raw);
}

TEST(TransportParams, MissingInitialSourceCid) {
  TransportParameterSet s;
  s.set_integer(tp::kInitialMaxData, 1000);
  const auto back = decode_transport_params(encode_transport_params(s));
  EXPECT_FALSE(back.has(tp::kInitialSourceConnectionId));
  EXPECT_FALSE(back.connection_id(tp::kInitialSourceConnectionId).has_value());
}

TEST(TransportParams, DuplicatesKeptInOrder) {
  TransportParameterSet s;
  s.append(tp::kAckDelayExponent, encode_varint(3));
  s.append(tp::kMaxIdleTimeout, encode_varint(10));
  s.append(tp::kAckDelayExponent, encode_varint(5));
  const auto back = decode_transport_params(encode_transport_params(s));
  EXPECT_EQ(back.count(tp::kAckDelayExponent), 2u);
  ASSERT_EQ(back.entries().size(), 3u);
  EXPECT_EQ(back.entries()[0].value, encode_varint(3));
  EXPECT_EQ(back.entries()[2].value, encode_varint(5));
}

TEST(TransportParams, TruncatedTlv) {
  TransportParameterSet s;
  s.set_integer(tp::kInitialMaxData, 100000);
  Bytes raw = encode_transport_params(s);
  raw.pop_back();
  EXPECT_THROW(decode_transport_params(raw), CodecError);
}
