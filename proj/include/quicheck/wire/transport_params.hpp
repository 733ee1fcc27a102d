#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "quicheck/wire/bytes.hpp"
#include "quicheck/wire/connection_id.hpp"
#include "quicheck/wire/frame.hpp"

namespace quicheck {

namespace tp {
inline constexpr std::uint64_t kOriginalDestinationConnectionId = 0x00;
inline constexpr std::uint64_t kMaxIdleTimeout = 0x01;
inline constexpr std::uint64_t kStatelessResetToken = 0x02;
inline constexpr std::uint64_t kMaxUdpPayloadSize = 0x03;
inline constexpr std::uint64_t kInitialMaxData = 0x04;
inline constexpr std::uint64_t kInitialMaxStreamDataBidiLocal = 0x05;
inline constexpr std::uint64_t kInitialMaxStreamDataBidiRemote = 0x06;
inline constexpr std::uint64_t kInitialMaxStreamDataUni = 0x07;
inline constexpr std::uint64_t kInitialMaxStreamsBidi = 0x08;
inline constexpr std::uint64_t kInitialMaxStreamsUni = 0x09;
inline constexpr std::uint64_t kAckDelayExponent = 0x0a;
inline constexpr std::uint64_t kMaxAckDelay = 0x0b;
inline constexpr std::uint64_t kDisableActiveMigration = 0x0c;
inline constexpr std::uint64_t kPreferredAddress = 0x0d;
inline constexpr std::uint64_t kActiveConnectionIdLimit = 0x0e;
inline constexpr std::uint64_t kInitialSourceConnectionId = 0x0f;
inline constexpr std::uint64_t kRetrySourceConnectionId = 0x10;

// Ids defined by draft-29; everything else is "unknown" and must be ignored.
bool is_known(std::uint64_t id);
}  // namespace tp

struct PreferredAddress {
  std::array<std::uint8_t, 4> ipv4{};
  std::uint16_t ipv4_port = 0;
  std::array<std::uint8_t, 16> ipv6{};
  std::uint16_t ipv6_port = 0;
  ConnectionId cid;
  StatelessResetToken reset_token{};
  friend bool operator==(const PreferredAddress&, const PreferredAddress&) = default;
};

Bytes encode_preferred_address(const PreferredAddress& pa);
PreferredAddress decode_preferred_address(ByteSpan raw);

struct TransportParameter {
  std::uint64_t id = 0;
  Bytes value;
  friend bool operator==(const TransportParameter&, const TransportParameter&) = default;
};

// Order-preserving TLV list. Duplicates and unknown ids are kept verbatim;
// judging them is the engine's job.
class TransportParameterSet {
 public:
  TransportParameterSet() = default;
  explicit TransportParameterSet(std::vector<TransportParameter> entries)
      : entries_(std::move(entries)) {}

  const std::vector<TransportParameter>& entries() const noexcept { return entries_; }
  std::vector<TransportParameter>& entries() noexcept { return entries_; }

  bool has(std::uint64_t id) const;
  std::size_t count(std::uint64_t id) const;
  // First occurrence.
  const TransportParameter* find(std::uint64_t id) const;

  // Decoded views. Return nullopt when absent; throw CodecError when the
  // value is not a well-formed varint / address.
  std::optional<std::uint64_t> integer(std::uint64_t id) const;
  std::optional<ConnectionId> connection_id(std::uint64_t id) const;
  std::optional<PreferredAddress> preferred_address() const;
  bool flag(std::uint64_t id) const { return has(id); }

  // Replace-or-append setters used to build a hello.
  void set_integer(std::uint64_t id, std::uint64_t v);
  void set_bytes(std::uint64_t id, Bytes v);
  void set_connection_id(std::uint64_t id, const ConnectionId& cid);
  void set_flag(std::uint64_t id);
  void append(std::uint64_t id, Bytes v) { entries_.push_back({id, std::move(v)}); }
  void erase(std::uint64_t id);

  friend bool operator==(const TransportParameterSet&, const TransportParameterSet&) = default;

 private:
  std::vector<TransportParameter> entries_;
};

// Throws CodecError(kTruncated) on a truncated TLV.
TransportParameterSet decode_transport_params(ByteSpan bytes);
Bytes encode_transport_params(const TransportParameterSet& set);

}  // namespace quicheck
