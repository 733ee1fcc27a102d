#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace quicheck {

// IPv4 endpoint address. The tester works on localhost, so IPv6 is not
// modelled.
struct Address {
  std::uint32_t ip = 0;
  std::uint16_t port = 0;

  std::string to_string() const;
  // "a.b.c.d:port"; throws InputError.
  static Address parse(std::string_view text);

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

inline constexpr std::uint32_t kLoopback = 0x7f000001;

}  // namespace quicheck
