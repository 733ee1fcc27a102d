#include "quicheck/wire/transport_params.hpp"

#include <algorithm>

#include "quicheck/errors.hpp"
#include "quicheck/wire/varint.hpp"

namespace quicheck {

bool tp::is_known(std::uint64_t id) { return id <= kRetrySourceConnectionId; }

Bytes encode_preferred_address(const PreferredAddress& pa) {
  Bytes out(pa.ipv4.begin(), pa.ipv4.end());
  append_u16(out, pa.ipv4_port);
  out.insert(out.end(), pa.ipv6.begin(), pa.ipv6.end());
  append_u16(out, pa.ipv6_port);
  if (!pa.cid.within_limit()) throw RangeError("preferred_address CID exceeds 16 bytes");
  out.push_back(static_cast<std::uint8_t>(pa.cid.size()));
  out.insert(out.end(), pa.cid.bytes().begin(), pa.cid.bytes().end());
  out.insert(out.end(), pa.reset_token.begin(), pa.reset_token.end());
  return out;
}

PreferredAddress decode_preferred_address(ByteSpan raw) {
  ByteReader r(raw);
  PreferredAddress pa;
  auto v4 = r.view(4, "preferred_address.ipv4");
  std::copy(v4.begin(), v4.end(), pa.ipv4.begin());
  pa.ipv4_port = r.u16("preferred_address.ipv4_port");
  auto v6 = r.view(16, "preferred_address.ipv6");
  std::copy(v6.begin(), v6.end(), pa.ipv6.begin());
  pa.ipv6_port = r.u16("preferred_address.ipv6_port");
  const auto len = r.u8("preferred_address.cid_length");
  pa.cid = ConnectionId(r.bytes(len, "preferred_address.cid"));
  auto tok = r.view(16, "preferred_address.reset_token");
  std::copy(tok.begin(), tok.end(), pa.reset_token.begin());
  if (!r.empty()) {
    throw CodecError(CodecError::Kind::kMalformed, r.absolute_offset(), "preferred_address");
  }
  return pa;
}

bool TransportParameterSet::has(std::uint64_t id) const { return find(id) != nullptr; }

std::size_t TransportParameterSet::count(std::uint64_t id) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [id](const auto& e) { return e.id == id; }));
}

const TransportParameter* TransportParameterSet::find(std::uint64_t id) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [id](const auto& e) { return e.id == id; });
  return it == entries_.end() ? nullptr : &*it;
}

std::optional<std::uint64_t> TransportParameterSet::integer(std::uint64_t id) const {
  const auto* e = find(id);
  if (!e) return std::nullopt;
  auto d = decode_varint(e->value);
  if (d.consumed != e->value.size()) {
    throw CodecError(CodecError::Kind::kMalformed, d.consumed, "transport_parameter.value");
  }
  return d.value;
}

std::optional<ConnectionId> TransportParameterSet::connection_id(std::uint64_t id) const {
  const auto* e = find(id);
  if (!e) return std::nullopt;
  return ConnectionId(e->value);
}

std::optional<PreferredAddress> TransportParameterSet::preferred_address() const {
  const auto* e = find(tp::kPreferredAddress);
  if (!e) return std::nullopt;
  return decode_preferred_address(e->value);
}

void TransportParameterSet::set_bytes(std::uint64_t id, Bytes v) {
  for (auto& e : entries_) {
    if (e.id == id) {
      e.value = std::move(v);
      return;
    }
  }
  entries_.push_back({id, std::move(v)});
}

void TransportParameterSet::set_integer(std::uint64_t id, std::uint64_t v) {
  set_bytes(id, encode_varint(v));
}

void TransportParameterSet::set_connection_id(std::uint64_t id, const ConnectionId& cid) {
  set_bytes(id, cid.bytes());
}

void TransportParameterSet::set_flag(std::uint64_t id) { set_bytes(id, {}); }

void TransportParameterSet::erase(std::uint64_t id) {
  std::erase_if(entries_, [id](const auto& e) { return e.id == id; });
}

TransportParameterSet decode_transport_params(ByteSpan bytes) {
  ByteReader r(bytes);
  std::vector<TransportParameter> entries;
  while (!r.empty()) {
    TransportParameter p;
    p.id = r.varint("transport_parameter.id");
    const auto len = r.varint("transport_parameter.length");
    p.value = r.bytes(len, "transport_parameter.value");
    entries.push_back(std::move(p));
  }
  return TransportParameterSet(std::move(entries));
}

Bytes encode_transport_params(const TransportParameterSet& set) {
  Bytes out;
  for (const auto& e : set.entries()) {
    append_varint(out, e.id);
    append_varint(out, e.value.size());
    out.insert(out.end(), e.value.begin(), e.value.end());
  }
  return out;
}

}  // namespace quicheck
