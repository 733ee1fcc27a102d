#include "quicheck/engine/state.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "quicheck/errors.hpp"

namespace quicheck {

std::string Address::to_string() const {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xff) + "." +
         std::to_string((ip >> 8) & 0xff) + "." + std::to_string(ip & 0xff) + ":" +
         std::to_string(port);
}

Address Address::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw InputError("address '" + std::string(text) + "' lacks a port");
  }
  auto number = [&](std::string_view s, unsigned max) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v > max || s.empty()) {
      throw InputError("malformed address '" + std::string(text) + "'");
    }
    return v;
  };
  Address a;
  std::string_view host = text.substr(0, colon);
  if (host == "localhost") host = "127.0.0.1";
  for (int i = 0; i < 4; ++i) {
    const auto dot = host.find('.');
    if ((i < 3) == (dot == std::string_view::npos)) {
      throw InputError("malformed address '" + std::string(text) + "'");
    }
    a.ip = (a.ip << 8) | number(host.substr(0, dot), 255);
    host = dot == std::string_view::npos ? std::string_view{} : host.substr(dot + 1);
  }
  a.port = static_cast<std::uint16_t>(number(text.substr(colon + 1), 65535));
  return a;
}

std::string_view role_name(Role r) { return r == Role::kClient ? "client" : "server"; }

std::string_view direction_name(Direction d) {
  return d == Direction::kFromTester ? "tester" : "peer";
}

Role parse_role(std::string_view text) {
  if (text == "client") return Role::kClient;
  if (text == "server") return Role::kServer;
  throw InputError("unknown role '" + std::string(text) + "' (expected client|server)");
}

std::string_view policy_name(MigrationPolicy p) {
  return p == MigrationPolicy::kAllLevels ? "all-levels" : "app-level";
}

MigrationPolicy parse_policy(std::string_view text) {
  if (text == "all-levels") return MigrationPolicy::kAllLevels;
  if (text == "app-level") return MigrationPolicy::kAppLevelOnly;
  throw InputError("unknown policy '" + std::string(text) + "' (expected all-levels|app-level)");
}

std::size_t CidLedger::active_count() const {
  std::size_t n = 0;
  for (const auto& [seq, cid] : issued) {
    if (seq >= retire_prior_to && !retired.contains(seq)) ++n;
  }
  return n;
}

ConnectionState::ConnectionState(Role role, MigrationPolicy p, std::uint64_t t)
    : tester_role(role), policy(p), tag(t) {
  tester().role = role;
  peer().role = opposite(role);
  // Sequence 0 is the CID carried in the handshake's source CID field.
  for (auto& e : endpoints) {
    e.cids.issued[0] = ConnectionId{};
    e.cids.highest_sequence = 0;
  }
}

const EndpointState& ConnectionState::client() const { return at(endpoint_of(Role::kClient)); }
const EndpointState& ConnectionState::server() const { return at(endpoint_of(Role::kServer)); }

bool ConnectionState::handshake_complete() const {
  return client().handshake.finished_sent && server().handshake.finished_sent;
}

bool ConnectionState::handshake_confirmed(Endpoint e) const {
  if (at(e).role == Role::kClient) return server().handshake.handshake_done_sent;
  return handshake_complete();
}

std::uint64_t stream_data_limit(const EndpointState& receiver, std::uint64_t stream_id) {
  if (auto it = receiver.flow.stream_limit.find(stream_id); it != receiver.flow.stream_limit.end()) {
    return it->second;
  }
  if (!is_bidi(stream_id)) return receiver.flow.initial_stream_data_uni;
  return initiator_of(stream_id) == receiver.role ? receiver.flow.initial_stream_data_bidi_local
                                                  : receiver.flow.initial_stream_data_bidi_remote;
}

void apply_transport_params(EndpointState& owner, const TransportParameterSet& set) {
  auto get = [&set](std::uint64_t id) -> std::uint64_t {
    try {
      return set.integer(id).value_or(0);
    } catch (const CodecError&) {
      return 0;
    }
  };
  auto& f = owner.flow;
  f.params_known = true;
  f.max_data = std::max(f.max_data, get(tp::kInitialMaxData));
  f.max_streams_bidi = std::max(f.max_streams_bidi, get(tp::kInitialMaxStreamsBidi));
  f.max_streams_uni = std::max(f.max_streams_uni, get(tp::kInitialMaxStreamsUni));
  f.initial_stream_data_bidi_local = get(tp::kInitialMaxStreamDataBidiLocal);
  f.initial_stream_data_bidi_remote = get(tp::kInitialMaxStreamDataBidiRemote);
  f.initial_stream_data_uni = get(tp::kInitialMaxStreamDataUni);
}

std::uint64_t completed_request_streams(const ConnectionState& state) {
  std::set<std::uint64_t> done;
  for (const auto& [id, s] : state.client().flow.streams) {
    if (!is_client_initiated(id) || !is_bidi(id)) continue;
    if (s.reset || (s.final_size && s.highest_offset == *s.final_size)) done.insert(id);
  }
  // Requests the client abandoned with RESET_STREAM count as answered.
  for (const auto& [id, s] : state.server().flow.streams) {
    if (is_client_initiated(id) && is_bidi(id) && s.reset) done.insert(id);
  }
  return done.size();
}

}  // namespace quicheck
