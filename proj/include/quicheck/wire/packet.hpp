#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/wire/bytes.hpp"
#include "quicheck/wire/connection_id.hpp"
#include "quicheck/wire/frame.hpp"

namespace quicheck {

// draft-29
inline constexpr std::uint32_t kDraft29Version = 0xff00001d;

enum class PacketType : std::uint8_t { kInitial, kZeroRtt, kHandshake, kOneRtt };
enum class HeaderForm : std::uint8_t { kLong, kShort };
enum class PnSpace : std::uint8_t { kInitial = 0, kHandshake = 1, kApplication = 2 };

inline constexpr std::size_t kPnSpaceCount = 3;

std::string_view packet_type_name(PacketType t);
std::string_view pn_space_name(PnSpace s);
PnSpace space_of(PacketType t);
inline HeaderForm form_of(PacketType t) {
  return t == PacketType::kOneRtt ? HeaderForm::kShort : HeaderForm::kLong;
}

// Null-cipher packet: headers and payload in the clear, packet number
// always carried as a 2-byte truncated field.
struct Packet {
  PacketType type = PacketType::kOneRtt;
  std::uint32_t version = kDraft29Version;  // long header only
  ConnectionId dcid;
  ConnectionId scid;                        // long header only
  Bytes token;                              // Initial only
  std::uint64_t packet_number = 0;
  bool spin = false;                        // short header only
  bool key_phase = false;                   // short header only
  std::uint8_t reserved_bits = 0;           // 2 bits, must be zero on the wire
  std::vector<Frame> frames;

  HeaderForm form() const { return form_of(type); }
  friend bool operator==(const Packet&, const Packet&) = default;
};

struct DecodeContext {
  std::size_t short_dcid_length = 8;
  std::uint32_t pinned_version = kDraft29Version;
  // Largest packet number seen from this sender, per space, for expanding
  // truncated packet numbers.
  std::array<std::optional<std::uint64_t>, kPnSpaceCount> largest_pn{};
};

struct DecodedPacket {
  Packet packet;
  std::size_t consumed = 0;
  // Non-fatal header anomalies: reserved bits set, fixed bit cleared,
  // unexpected version, unusual packet-number length.
  std::vector<std::string> annotations;
};

// Decodes one packet at the front of `bytes`. A short-header packet consumes
// the remainder of the datagram.
DecodedPacket decode_packet(ByteSpan bytes, const DecodeContext& ctx,
                            std::size_t base_offset = 0);
// Splits a datagram into its coalesced packets.
std::vector<DecodedPacket> decode_datagram(ByteSpan bytes, const DecodeContext& ctx);

Bytes encode_packet(const Packet& packet);
Bytes encode_datagram(const std::vector<Packet>& packets);

// Expands a truncated packet number given the largest one seen so far.
std::uint64_t expand_packet_number(std::optional<std::uint64_t> largest,
                                   std::uint64_t truncated, std::size_t pn_bytes);

}  // namespace quicheck
