#include "quicheck/wire/varint.hpp"

#include <array>

#include "quicheck/errors.hpp"

namespace quicheck {

namespace {

std::string codec_message(CodecError::Kind kind, std::size_t offset,
                          const std::string& field) {
  const char* what =
      kind == CodecError::Kind::kTruncated ? "truncated" : "malformed";
  return std::string(what) + " field '" + field + "' at offset " +
         std::to_string(offset);
}

}  // namespace

CodecError::CodecError(Kind kind, std::size_t offset, std::string field)
    : std::runtime_error(codec_message(kind, offset, field)),
      kind_(kind),
      offset_(offset),
      field_(std::move(field)) {}

std::string to_hex(ByteSpan bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw InputError("hex string has odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw InputError("invalid hex digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::size_t varint_length(std::uint64_t v) {
  if (v < (1u << 6)) return 1;
  if (v < (1u << 14)) return 2;
  if (v < (std::uint64_t{1} << 30)) return 4;
  if (v <= kVarIntMax) return 8;
  throw RangeError("varint value " + std::to_string(v) + " exceeds 2^62-1");
}

void append_varint(Bytes& out, std::uint64_t v) {
  const std::size_t len = varint_length(v);
  const std::uint8_t prefix = len == 1 ? 0x00 : len == 2 ? 0x40 : len == 4 ? 0x80 : 0xc0;
  for (std::size_t i = 0; i < len; ++i) {
    auto shift = 8 * (len - 1 - i);
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  out[out.size() - len] |= prefix;
}

Bytes encode_varint(std::uint64_t v) {
  Bytes out;
  append_varint(out, v);
  return out;
}

DecodedVarInt decode_varint(ByteSpan bytes) {
  ByteReader reader(bytes);
  DecodedVarInt d;
  d.value = reader.varint("varint");
  d.consumed = reader.position();
  return d;
}

void ByteReader::require(std::size_t n, const char* field) const {
  if (remaining() < n) {
    throw CodecError(CodecError::Kind::kTruncated, absolute_offset(), field);
  }
}

std::uint8_t ByteReader::peek(const char* field) const {
  require(1, field);
  return data_[pos_];
}

std::uint64_t ByteReader::varint(const char* field) {
  require(1, field);
  const std::size_t len = std::size_t{1} << (data_[pos_] >> 6);
  require(len, field);
  std::uint64_t v = data_[pos_] & 0x3f;
  for (std::size_t i = 1; i < len; ++i) v = (v << 8) | data_[pos_ + i];
  pos_ += len;
  return v;
}

std::uint8_t ByteReader::u8(const char* field) {
  require(1, field);
  return data_[pos_++];
}

std::uint16_t ByteReader::u16(const char* field) {
  require(2, field);
  std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32(const char* field) {
  require(4, field);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
  pos_ += 4;
  return v;
}

ByteSpan ByteReader::view(std::size_t n, const char* field) {
  require(n, field);
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

Bytes ByteReader::bytes(std::size_t n, const char* field) {
  auto s = view(n, field);
  return Bytes(s.begin(), s.end());
}

Bytes ByteReader::rest() {
  Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_), data_.end());
  pos_ = data_.size();
  return out;
}

void append_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void append_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace quicheck
