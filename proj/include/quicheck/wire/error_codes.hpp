#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace quicheck {

// Transport error codes carried in CONNECTION_CLOSE (type 0x1c), draft-29.
namespace error_code {
inline constexpr std::uint64_t kNoError = 0x0;
inline constexpr std::uint64_t kInternalError = 0x1;
inline constexpr std::uint64_t kConnectionRefused = 0x2;
inline constexpr std::uint64_t kFlowControlError = 0x3;
inline constexpr std::uint64_t kStreamLimitError = 0x4;
inline constexpr std::uint64_t kStreamStateError = 0x5;
inline constexpr std::uint64_t kFinalSizeError = 0x6;
inline constexpr std::uint64_t kFrameEncodingError = 0x7;
inline constexpr std::uint64_t kTransportParameterError = 0x8;
inline constexpr std::uint64_t kConnectionIdLimitError = 0x9;
inline constexpr std::uint64_t kProtocolViolation = 0xa;
inline constexpr std::uint64_t kInvalidToken = 0xb;
inline constexpr std::uint64_t kApplicationError = 0xc;
inline constexpr std::uint64_t kCryptoBufferExceeded = 0xd;
inline constexpr std::uint64_t kCryptoErrorFirst = 0x100;
inline constexpr std::uint64_t kCryptoErrorLast = 0x1ff;
}  // namespace error_code

// "FRAME_ENCODING_ERROR", or "CRYPTO_ERROR(0x12a)", or "0x4242".
std::string error_code_name(std::uint64_t code);
std::optional<std::uint64_t> error_code_from_name(std::string_view name);
bool is_known_error_code(std::uint64_t code);

}  // namespace quicheck
