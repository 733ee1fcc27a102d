#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/engine/state.hpp"
#include "quicheck/gen/random.hpp"
#include "quicheck/wire/packet.hpp"

namespace quicheck {

enum class MutationScope : std::uint8_t {
  kHello,          // rewrites the transport parameters in the hello / EncryptedExtensions
  kInitialPacket,  // rewrites a field of an Initial packet header
  kFrame,          // adds an offending frame to a 1-RTT packet
};

struct Mutation {
  std::string id;
  std::string target;  // requirement id violated by the mutated traffic
  MutationScope scope = MutationScope::kFrame;
  Role sender = Role::kClient;  // role that can emit it; both when `any_sender`
  bool any_sender = true;
  std::string description;
};

const std::vector<Mutation>& mutation_table();
// nullptr when unknown.
const Mutation* find_mutation(std::string_view id);

// Applies `m` to a packet the tester is about to send. `state` is the
// monitor's view before the packet goes out. Returns nullopt when the
// mutation does not apply to this packet; the caller tries a later one.
std::optional<Packet> apply_mutation(const Mutation& m, const Packet& pkt, Rng& rng,
                                     const ConnectionState& state);

}  // namespace quicheck
