#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "quicheck/wire/bytes.hpp"

namespace quicheck {

// Stand-in for the TLS handshake carried in CRYPTO frames under the null
// cipher. Each message is <type:1><varint length><body>. Hello bodies are
// encoded transport parameters.
enum class HandshakeMessageType : std::uint8_t {
  kClientHello = 1,
  kServerHello = 2,
  kNewSessionTicket = 4,
  kEncryptedExtensions = 8,
  kFinished = 20,
};

std::string_view handshake_message_name(HandshakeMessageType t);

struct HandshakeMessage {
  HandshakeMessageType type = HandshakeMessageType::kFinished;
  Bytes body;
  friend bool operator==(const HandshakeMessage&, const HandshakeMessage&) = default;
};

Bytes encode_handshake_message(const HandshakeMessage& msg);
Bytes encode_handshake_messages(const std::vector<HandshakeMessage>& msgs);

struct ParsedHandshakeMessages {
  std::vector<HandshakeMessage> messages;
  std::size_t consumed = 0;  // bytes of complete messages
};

// Parses as many complete messages as the buffer holds; a trailing partial
// message is left unconsumed.
ParsedHandshakeMessages parse_handshake_messages(ByteSpan stream);

// Reassembles one CRYPTO stream (one per encryption level).
class CryptoStream {
 public:
  // Accepts in-order data; overlapping retransmissions are ignored and gaps
  // are buffered until filled. Returns newly completed messages.
  std::vector<HandshakeMessage> add(std::uint64_t offset, ByteSpan data);
  std::uint64_t contiguous_end() const noexcept { return base_ + buffer_.size(); }
  friend bool operator==(const CryptoStream&, const CryptoStream&) = default;

 private:
  std::uint64_t base_ = 0;  // stream offset of buffer_[0]
  Bytes buffer_;            // contiguous, not yet parsed
  std::vector<std::pair<std::uint64_t, Bytes>> pending_;
};

}  // namespace quicheck
