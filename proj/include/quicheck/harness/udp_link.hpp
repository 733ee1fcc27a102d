#pragma once

#include <chrono>
#include <optional>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/harness/datagram.hpp"
#include "quicheck/harness/report.hpp"
#include "quicheck/harness/trace.hpp"

namespace quicheck {

struct RunConfig;

// Non-blocking IPv4 UDP socket bound to one local address.
class UdpLink {
 public:
  // Throws NetworkError when the socket cannot be bound.
  explicit UdpLink(Address local);
  ~UdpLink();
  UdpLink(const UdpLink&) = delete;
  UdpLink& operator=(const UdpLink&) = delete;

  void send(const Bytes& bytes, Address to);
  std::optional<Datagram> receive(std::chrono::milliseconds timeout);
  Address local() const { return local_; }

 private:
  int fd_ = -1;
  Address local_;
};

// One iteration against a real implementation, on the wall clock. The
// tester does not migrate here since it owns a single socket.
IterationResult run_udp_iteration(const TestSpec& spec, const RunConfig& cfg, UdpLink& link,
                                  std::uint64_t index, TraceIteration* record = nullptr);

}  // namespace quicheck
