#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "quicheck/wire/bytes.hpp"

namespace quicheck {

// Opaque connection identifier. Encoders refuse anything longer than
// kMaxLength; decoders accept whatever length byte the wire carries so the
// engine can flag oversized CIDs as a requirement violation.
class ConnectionId {
 public:
  static constexpr std::size_t kMaxLength = 16;

  ConnectionId() = default;
  explicit ConnectionId(Bytes bytes) : bytes_(std::move(bytes)) {}

  const Bytes& bytes() const noexcept { return bytes_; }
  std::size_t size() const noexcept { return bytes_.size(); }
  bool empty() const noexcept { return bytes_.empty(); }
  bool within_limit() const noexcept { return bytes_.size() <= kMaxLength; }
  std::string hex() const { return to_hex(bytes_); }

  friend bool operator==(const ConnectionId&, const ConnectionId&) = default;
  friend auto operator<=>(const ConnectionId&, const ConnectionId&) = default;

 private:
  Bytes bytes_;
};

}  // namespace quicheck
