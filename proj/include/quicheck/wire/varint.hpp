#pragma once

#include <cstddef>
#include <cstdint>

#include "quicheck/wire/bytes.hpp"

namespace quicheck {

// QUIC variable-length integer limits.
inline constexpr std::uint64_t kVarIntMax = (std::uint64_t{1} << 62) - 1;

struct DecodedVarInt {
  std::uint64_t value = 0;
  std::size_t consumed = 0;
};

// Number of bytes (1, 2, 4 or 8) the minimal encoding of `v` takes.
// Throws RangeError if v > kVarIntMax.
std::size_t varint_length(std::uint64_t v);

Bytes encode_varint(std::uint64_t v);
void append_varint(Bytes& out, std::uint64_t v);

// Throws CodecError(kTruncated) when the length class exceeds the input.
DecodedVarInt decode_varint(ByteSpan bytes);

// Sequential reader used by every decoder in the wire module. Errors report
// the absolute offset from the start of the outermost buffer.
class ByteReader {
 public:
  explicit ByteReader(ByteSpan data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  bool empty() const noexcept { return pos_ >= data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }
  std::size_t absolute_offset() const noexcept { return base_ + pos_; }

  std::uint64_t varint(const char* field);
  std::uint8_t u8(const char* field);
  std::uint16_t u16(const char* field);
  std::uint32_t u32(const char* field);
  Bytes bytes(std::size_t n, const char* field);
  ByteSpan view(std::size_t n, const char* field);
  Bytes rest();
  std::uint8_t peek(const char* field) const;

 private:
  void require(std::size_t n, const char* field) const;

  ByteSpan data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

void append_u16(Bytes& out, std::uint16_t v);
void append_u32(Bytes& out, std::uint32_t v);

}  // namespace quicheck
