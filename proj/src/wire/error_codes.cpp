#include "quicheck/wire/error_codes.hpp"

#include <array>
#include <cstdio>
#include <utility>

namespace quicheck {

namespace {

constexpr std::array<std::pair<std::uint64_t, std::string_view>, 14> kNames = {{
    {error_code::kNoError, "NO_ERROR"},
    {error_code::kInternalError, "INTERNAL_ERROR"},
    {error_code::kConnectionRefused, "CONNECTION_REFUSED"},
    {error_code::kFlowControlError, "FLOW_CONTROL_ERROR"},
    {error_code::kStreamLimitError, "STREAM_LIMIT_ERROR"},
    {error_code::kStreamStateError, "STREAM_STATE_ERROR"},
    {error_code::kFinalSizeError, "FINAL_SIZE_ERROR"},
    {error_code::kFrameEncodingError, "FRAME_ENCODING_ERROR"},
    {error_code::kTransportParameterError, "TRANSPORT_PARAMETER_ERROR"},
    {error_code::kConnectionIdLimitError, "CONNECTION_ID_LIMIT_ERROR"},
    {error_code::kProtocolViolation, "PROTOCOL_VIOLATION"},
    {error_code::kInvalidToken, "INVALID_TOKEN"},
    {error_code::kApplicationError, "APPLICATION_ERROR"},
    {error_code::kCryptoBufferExceeded, "CRYPTO_BUFFER_EXCEEDED"},
}};

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string error_code_name(std::uint64_t code) {
  for (const auto& [value, name] : kNames) {
    if (value == code) return std::string(name);
  }
  if (code >= error_code::kCryptoErrorFirst && code <= error_code::kCryptoErrorLast) {
    return "CRYPTO_ERROR(" + hex(code) + ")";
  }
  return hex(code);
}

std::optional<std::uint64_t> error_code_from_name(std::string_view name) {
  for (const auto& [value, n] : kNames) {
    if (n == name) return value;
  }
  if (name.starts_with("0x")) {
    std::uint64_t v = 0;
    for (char c : name.substr(2)) {
      int d = (c >= '0' && c <= '9') ? c - '0'
              : (c >= 'a' && c <= 'f') ? c - 'a' + 10
              : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                       : -1;
      if (d < 0) return std::nullopt;
      v = v * 16 + static_cast<std::uint64_t>(d);
    }
    return v;
  }
  return std::nullopt;
}

bool is_known_error_code(std::uint64_t code) {
  return code <= error_code::kCryptoBufferExceeded ||
         (code >= error_code::kCryptoErrorFirst && code <= error_code::kCryptoErrorLast);
}

}  // namespace quicheck
