#include "quicheck/wire/handshake_messages.hpp"

#include <algorithm>

#include "quicheck/errors.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

std::string_view handshake_message_name(HandshakeMessageType t) {
  switch (t) {
    case HandshakeMessageType::kClientHello: return "ClientHello";
    case HandshakeMessageType::kServerHello: return "ServerHello";
    case HandshakeMessageType::kNewSessionTicket: return "NewSessionTicket";
    case HandshakeMessageType::kEncryptedExtensions: return "EncryptedExtensions";
    case HandshakeMessageType::kFinished: return "Finished";
  }
  return "?";
}

Bytes encode_handshake_message(const HandshakeMessage& msg) {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(msg.type));
  append_varint(out, msg.body.size());
  out.insert(out.end(), msg.body.begin(), msg.body.end());
  return out;
}

Bytes encode_handshake_messages(const std::vector<HandshakeMessage>& msgs) {
  Bytes out;
  for (const auto& m : msgs) {
    auto b = encode_handshake_message(m);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

ParsedHandshakeMessages parse_handshake_messages(ByteSpan stream) {
  ParsedHandshakeMessages out;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    try {
      ByteReader r(stream.subspan(pos));
      HandshakeMessage m;
      m.type = static_cast<HandshakeMessageType>(r.u8("handshake.type"));
      const auto len = r.varint("handshake.length");
      m.body = r.bytes(len, "handshake.body");
      pos += r.position();
      out.messages.push_back(std::move(m));
    } catch (const CodecError&) {
      break;
    }
  }
  out.consumed = pos;
  return out;
}

std::vector<HandshakeMessage> CryptoStream::add(std::uint64_t offset, ByteSpan data) {
  pending_.emplace_back(offset, Bytes(data.begin(), data.end()));
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
      const auto end = contiguous_end();
      const auto chunk_end = it->first + it->second.size();
      if (it->first <= end) {
        if (chunk_end > end) {
          auto skip = static_cast<std::ptrdiff_t>(end - it->first);
          buffer_.insert(buffer_.end(), it->second.begin() + skip, it->second.end());
        }
        pending_.erase(it);
        progressed = true;
        break;
      }
    }
  }
  auto parsed = parse_handshake_messages(buffer_);
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(parsed.consumed));
  base_ += parsed.consumed;
  return std::move(parsed.messages);
}

}  // namespace quicheck
