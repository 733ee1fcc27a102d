#pragma once

#include <cstdint>

#include "quicheck/engine/address.hpp"
#include "quicheck/wire/bytes.hpp"

namespace quicheck {

struct Datagram {
  Address src;
  Address dst;
  Bytes bytes;
  friend bool operator==(const Datagram&, const Datagram&) = default;
};

// Virtual-time limits of one iteration.
inline constexpr std::uint64_t kIterationCapMs = 10'000;
inline constexpr std::uint64_t kDefaultSilenceMs = 3'000;

}  // namespace quicheck
