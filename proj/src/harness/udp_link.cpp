#include "quicheck/harness/udp_link.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "quicheck/errors.hpp"
#include "quicheck/harness/runner.hpp"
#include "quicheck/harness/tester.hpp"

namespace quicheck {

namespace {

sockaddr_in to_sockaddr(Address a) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(a.ip);
  sa.sin_port = htons(a.port);
  return sa;
}

constexpr std::size_t kMaxDatagram = 65535;
// How long the tester lingers after its own CONNECTION_CLOSE.
constexpr std::uint64_t kLingerMs = 50;

}  // namespace

UdpLink::UdpLink(Address local) : local_(local) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw NetworkError(std::string("socket: ") + std::strerror(errno));
  const auto sa = to_sockaddr(local);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw NetworkError("cannot bind " + local.to_string() + ": " + err);
  }
}

UdpLink::~UdpLink() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpLink::send(const Bytes& bytes, Address to) {
  const auto sa = to_sockaddr(to);
  if (::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&sa),
               sizeof sa) < 0) {
    throw NetworkError("sendto " + to.to_string() + ": " + std::strerror(errno));
  }
}

std::optional<Datagram> UdpLink::receive(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return std::nullopt;
  Bytes buf(kMaxDatagram);
  sockaddr_in from{};
  socklen_t len = sizeof from;
  const auto n =
      ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return Datagram{Address{ntohl(from.sin_addr.s_addr), ntohs(from.sin_port)}, local_,
                  std::move(buf)};
}

IterationResult run_udp_iteration(const TestSpec& spec, const RunConfig& cfg, UdpLink& link,
                                  std::uint64_t index, TraceIteration* record) {
  using Clock = std::chrono::steady_clock;
  const auto seed = iteration_seed(cfg.seed, index);
  Tester tester(spec, seed, /*allow_migration=*/false);
  IterationMonitor mon(spec, cfg.policy, cfg.silence_ms, index);
  const auto start = Clock::now();
  auto elapsed = [&] {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count());
  };
  // Drop whatever a previous connection left in the socket.
  while (link.receive(std::chrono::milliseconds(0))) {
  }

  std::uint64_t last_activity = 0;
  std::optional<std::uint64_t> closed_at;
  std::uint64_t now = 0;
  while ((now = elapsed()) < kIterationCapMs) {
    while (!mon.stopped() && !tester.done()) {
      auto d = tester.poll(mon.state(), now);
      if (!d) break;
      mon.observe(Direction::kFromTester, *d, now);
      link.send(d->bytes, d->dst);
      last_activity = now;
    }
    if (tester.done() && !closed_at) closed_at = now;
    if (mon.stopped() || mon.state().peer().close) break;
    if (closed_at && now - *closed_at >= kLingerMs) break;
    if (auto d = link.receive(std::chrono::milliseconds(5))) {
      now = elapsed();
      const auto r = mon.observe(Direction::kFromPeer, *d, now);
      tester.on_datagram(*d, r.packets);
      last_activity = now;
      continue;
    }
    const auto quiet_since = std::max(last_activity, mon.stimulus_ms().value_or(0));
    if (now - quiet_since >= cfg.silence_ms) break;
  }
  now = std::min(elapsed(), kIterationCapMs);
  auto result = mon.finish(now, index, seed);
  if (record) *record = TraceIteration{index, seed, mon.log(), now};
  return result;
}

}  // namespace quicheck
