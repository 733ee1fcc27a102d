#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "quicheck/wire/bytes.hpp"
#include "quicheck/wire/connection_id.hpp"

namespace quicheck {

enum class FrameKind : std::uint8_t {
  kPadding,
  kPing,
  kAck,
  kResetStream,
  kStopSending,
  kCrypto,
  kNewToken,
  kStream,
  kMaxData,
  kMaxStreamData,
  kMaxStreams,
  kDataBlocked,
  kStreamDataBlocked,
  kStreamsBlocked,
  kNewConnectionId,
  kRetireConnectionId,
  kPathChallenge,
  kPathResponse,
  kConnectionClose,
  kHandshakeDone,
  kUnknown,
};

inline constexpr std::size_t kFrameKindCount = 21;

std::string_view frame_kind_name(FrameKind kind);
// Accepts the upper-case names used in catalogs ("PATH_RESPONSE").
std::optional<FrameKind> frame_kind_from_name(std::string_view name);
const std::array<FrameKind, kFrameKindCount>& all_frame_kinds();

// A run of PADDING bytes. Consecutive 0x00 bytes decode as one frame.
struct Padding {
  std::uint64_t length = 1;
  friend bool operator==(const Padding&, const Padding&) = default;
};

struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};

struct AckRange {
  std::uint64_t gap = 0;
  std::uint64_t length = 0;
  friend bool operator==(const AckRange&, const AckRange&) = default;
};

struct EcnCounts {
  std::uint64_t ect0 = 0;
  std::uint64_t ect1 = 0;
  std::uint64_t ce = 0;
  friend bool operator==(const EcnCounts&, const EcnCounts&) = default;
};

// Wire-shaped ACK: largest acknowledged, first range, then (gap, length)
// pairs walking downwards. See ack_intervals() for the decoded form.
struct Ack {
  std::uint64_t largest = 0;
  std::uint64_t delay = 0;
  std::uint64_t first_range = 0;
  std::vector<AckRange> ranges;
  std::optional<EcnCounts> ecn;
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct ResetStream {
  std::uint64_t stream_id = 0;
  std::uint64_t error_code = 0;
  std::uint64_t final_size = 0;
  friend bool operator==(const ResetStream&, const ResetStream&) = default;
};

struct StopSending {
  std::uint64_t stream_id = 0;
  std::uint64_t error_code = 0;
  friend bool operator==(const StopSending&, const StopSending&) = default;
};

struct Crypto {
  std::uint64_t offset = 0;
  Bytes data;
  friend bool operator==(const Crypto&, const Crypto&) = default;
};

struct NewToken {
  Bytes token;
  friend bool operator==(const NewToken&, const NewToken&) = default;
};

// Encoded with the LEN bit always set and the OFF bit set iff offset != 0.
struct Stream {
  std::uint64_t stream_id = 0;
  std::uint64_t offset = 0;
  bool fin = false;
  Bytes data;
  friend bool operator==(const Stream&, const Stream&) = default;
};

struct MaxData {
  std::uint64_t maximum = 0;
  friend bool operator==(const MaxData&, const MaxData&) = default;
};

struct MaxStreamData {
  std::uint64_t stream_id = 0;
  std::uint64_t maximum = 0;
  friend bool operator==(const MaxStreamData&, const MaxStreamData&) = default;
};

struct MaxStreams {
  bool bidi = true;
  std::uint64_t maximum = 0;
  friend bool operator==(const MaxStreams&, const MaxStreams&) = default;
};

struct DataBlocked {
  std::uint64_t limit = 0;
  friend bool operator==(const DataBlocked&, const DataBlocked&) = default;
};

struct StreamDataBlocked {
  std::uint64_t stream_id = 0;
  std::uint64_t limit = 0;
  friend bool operator==(const StreamDataBlocked&, const StreamDataBlocked&) = default;
};

struct StreamsBlocked {
  bool bidi = true;
  std::uint64_t limit = 0;
  friend bool operator==(const StreamsBlocked&, const StreamsBlocked&) = default;
};

using StatelessResetToken = std::array<std::uint8_t, 16>;
using PathData = std::array<std::uint8_t, 8>;

struct NewConnectionId {
  std::uint64_t sequence = 0;
  std::uint64_t retire_prior_to = 0;
  ConnectionId cid;
  StatelessResetToken reset_token{};
  friend bool operator==(const NewConnectionId&, const NewConnectionId&) = default;
};

struct RetireConnectionId {
  std::uint64_t sequence = 0;
  friend bool operator==(const RetireConnectionId&, const RetireConnectionId&) = default;
};

struct PathChallenge {
  PathData data{};
  friend bool operator==(const PathChallenge&, const PathChallenge&) = default;
};

struct PathResponse {
  PathData data{};
  friend bool operator==(const PathResponse&, const PathResponse&) = default;
};

// Type 0x1c (transport) carries frame_type; 0x1d (application) does not.
struct ConnectionClose {
  bool application = false;
  std::uint64_t error_code = 0;
  std::uint64_t frame_type = 0;
  Bytes reason;
  friend bool operator==(const ConnectionClose&, const ConnectionClose&) = default;
};

struct HandshakeDone {
  friend bool operator==(const HandshakeDone&, const HandshakeDone&) = default;
};

// Unassigned type code. The body is carried as <varint length><bytes>, a
// convention shared by the decoder and the generator.
struct UnknownFrame {
  std::uint64_t type = 0x21;
  Bytes body;
  friend bool operator==(const UnknownFrame&, const UnknownFrame&) = default;
};

using Frame = std::variant<Padding, Ping, Ack, ResetStream, StopSending, Crypto,
                           NewToken, Stream, MaxData, MaxStreamData, MaxStreams,
                           DataBlocked, StreamDataBlocked, StreamsBlocked,
                           NewConnectionId, RetireConnectionId, PathChallenge,
                           PathResponse, ConnectionClose, HandshakeDone,
                           UnknownFrame>;

FrameKind kind_of(const Frame& frame);

// Inclusive [low, high] packet-number interval.
struct PacketNumberInterval {
  std::uint64_t low = 0;
  std::uint64_t high = 0;
  friend bool operator==(const PacketNumberInterval&, const PacketNumberInterval&) = default;
};

// Descending intervals covered by an ACK. Returns nullopt when a gap or range
// would underflow below packet number 0 (a malformed ACK).
std::optional<std::vector<PacketNumberInterval>> ack_intervals(const Ack& ack);
// Builds an ACK from ascending, non-overlapping, non-adjacent intervals.
Ack make_ack(const std::vector<PacketNumberInterval>& ascending, std::uint64_t delay);

struct DecodedFrame {
  Frame frame;
  std::size_t consumed = 0;
};

// `base_offset` is added to error offsets so packet decoding can report the
// position within the datagram.
DecodedFrame decode_frame(ByteSpan bytes, std::size_t base_offset = 0);
Bytes encode_frame(const Frame& frame);
void append_frame(Bytes& out, const Frame& frame);

// Raw type code the frame will be encoded with.
std::uint64_t frame_type_code(const Frame& frame);

}  // namespace quicheck
