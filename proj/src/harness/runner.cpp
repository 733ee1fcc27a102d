#include "quicheck/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/harness/tester.hpp"
#include "quicheck/harness/udp_link.hpp"
#include "quicheck/wire/error_codes.hpp"

namespace quicheck {

namespace {

constexpr std::uint64_t kPeerSeedSalt = 0x9e3779b97f4a7c15ULL;
// Datagrams one side may emit per virtual millisecond.
constexpr int kBurst = 16;

bool error_close(const CloseInfo& c) { return c.application || c.error_code != error_code::kNoError; }

}  // namespace

std::string RunConfig::target_description() const {
  return udp_target ? "udp:" + udp_target->to_string() : sim.describe();
}

void RunConfig::validate() const {
  if (iterations < 1) throw InputError("--iterations must be at least 1");
  if (workers < 1) throw InputError("--workers must be at least 1");
  if (silence_ms < 1) throw InputError("--timeout-ms must be positive");
}

IterationMonitor::IterationMonitor(const TestSpec& spec, MigrationPolicy policy,
                                   std::uint64_t silence_ms, std::uint64_t tag)
    : spec_(spec),
      targets_(spec.stimulus_targets()),
      silence_ms_(silence_ms),
      state_(spec.tester_role(), policy, tag) {
  state_.goal_requests = spec.params.requests;
}

IngestResult IterationMonitor::observe(Direction dir, const Datagram& d, std::uint64_t now_ms) {
  if (stopped_) return {};
  log_.push_back(TraceRecord{dir, now_ms, d});
  auto r = ingest_datagram(state_, dir, d.src, d.dst, d.bytes, now_ms);
  if (dir == Direction::kFromPeer && stimulus_ms_) peer_after_stimulus_ = true;
  const auto& registry = default_registry();
  for (const auto& v : r.verdicts) {
    if (!v.violation()) continue;
    if (registry.is_advisory(v.requirement)) {
      advisories_.push_back(v);
    } else if (v.direction == Direction::kFromTester &&
               std::find(targets_.begin(), targets_.end(), v.requirement) != targets_.end()) {
      if (!state_.stimulus_event) {
        state_.stimulus_event = v.event_index;
        stimulus_ms_ = now_ms;
      }
      stimuli_.push_back(v);
    } else {
      violations_.push_back(v);
      stopped_ = true;
      break;
    }
  }
  return r;
}

IterationResult IterationMonitor::finish(std::uint64_t end_ms, std::uint64_t index,
                                         std::uint64_t seed) {
  IterationResult out;
  out.index = index;
  out.seed = seed;
  out.end_ms = end_ms;
  out.verdicts = violations_;
  if (!stopped_) {
    for (auto& v : sweep_pending_checks(state_)) out.verdicts.push_back(std::move(v));
    const bool silent = stimulus_ms_ && !state_.peer().close && !peer_after_stimulus_ &&
                        end_ms - *stimulus_ms_ >= silence_ms_;
    out.verdicts.push_back(
        check_error_response(state_, observe_reaction(state_, silent), spec_.expected));
    out.verdicts.push_back(finalize_check(state_, spec_.goal));
  }
  out.stimuli = stimuli_;
  out.advisories = advisories_;
  out.passed = std::none_of(out.verdicts.begin(), out.verdicts.end(),
                            [](const Verdict& v) { return v.violation(); });

  const auto& peer_close = state_.peer().close;
  if (stopped_) {
    out.end_reason = EndReason::kViolation;
  } else if (peer_close && error_close(*peer_close)) {
    const auto& reaction = out.verdicts[out.verdicts.size() - 2];
    out.end_reason = reaction.violation() ? EndReason::kUnexpectedError : EndReason::kExpectedError;
  } else if (peer_close || state_.tester().close) {
    out.end_reason = EndReason::kCleanClose;
  } else {
    out.end_reason = EndReason::kTimeout;
  }
  return out;
}

IterationResult run_sim_iteration(const TestSpec& spec, const RunConfig& cfg, std::uint64_t index,
                                  TraceIteration* record) {
  const auto seed = iteration_seed(cfg.seed, index);
  Tester tester(spec, seed);
  SimPeer peer(spec.role_under_test, cfg.sim, seed ^ kPeerSeedSalt, spec.params);
  IterationMonitor mon(spec, cfg.policy, cfg.silence_ms, index);

  auto finished = [&] { return mon.stopped() || mon.state().peer().close || tester.done(); };
  std::uint64_t now = 0;
  for (; now < kIterationCapMs; ++now) {
    bool active = false;
    for (int k = 0; k < kBurst && !finished(); ++k) {
      auto d = tester.poll(mon.state(), now);
      if (!d) break;
      active = true;
      mon.observe(Direction::kFromTester, *d, now);
      if (!mon.stopped()) peer.receive(*d, now);
    }
    for (int k = 0; k < kBurst && !finished(); ++k) {
      auto d = peer.poll(now);
      if (!d) break;
      active = true;
      const auto r = mon.observe(Direction::kFromPeer, *d, now);
      if (!mon.stopped()) tester.on_datagram(*d, r.packets);
    }
    if (finished()) break;
    if (!active) {
      // Both sides are quiescent; nothing changes until the deadline.
      if (mon.stimulus_ms()) now = std::max(now, *mon.stimulus_ms() + cfg.silence_ms);
      break;
    }
  }
  now = std::min(now, kIterationCapMs);
  auto result = mon.finish(now, index, seed);
  if (record) *record = TraceIteration{index, seed, mon.log(), now};
  return result;
}

void fail_on_advisories(std::vector<IterationResult>& results) {
  for (auto& r : results) {
    if (!r.advisories.empty()) r.passed = false;
  }
}

Report run_test(const RunConfig& cfg) {
  cfg.validate();
  const TestSpec& spec = get_test(cfg.test, cfg.role_under_test);

  std::vector<IterationResult> results(cfg.iterations);
  std::vector<TraceIteration> traces(cfg.trace_path.empty() ? 0 : cfg.iterations);
  auto slot = [&](std::uint64_t i) { return traces.empty() ? nullptr : &traces[i]; };

  if (cfg.udp_target) {
    // A real peer is driven one connection at a time over a single socket.
    TestSpec live = spec;
    Address& local = live.tester_role() == Role::kClient ? live.params.client_address
                                                         : live.params.server_address;
    Address& remote = live.tester_role() == Role::kClient ? live.params.server_address
                                                          : live.params.client_address;
    remote = *cfg.udp_target;
    UdpLink link(local);
    for (std::uint64_t i = 0; i < cfg.iterations; ++i) {
      results[i] = run_udp_iteration(live, cfg, link, i, slot(i));
    }
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::uint64_t i = next++; i < cfg.iterations; i = next++) {
        try {
          results[i] = run_sim_iteration(spec, cfg, i, slot(i));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = cfg.iterations;
        }
      }
    };
    const auto n = std::min<std::uint64_t>(cfg.workers, cfg.iterations);
    std::vector<std::thread> pool;
    for (std::uint64_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  if (!cfg.trace_path.empty()) {
    save_trace(cfg.trace_path, traces,
               "test=" + spec.name + " role=" + std::string(role_name(spec.role_under_test)) +
                   " target=" + cfg.target_description());
  }
  if (cfg.count_advisories) fail_on_advisories(results);
  return make_report(spec.name, spec.role_under_test, cfg.target_description(), cfg.policy,
                     std::move(results));
}

Report replay_trace(const std::vector<TraceIteration>& trace, const TestSpec& spec,
                    MigrationPolicy policy, std::uint64_t silence_ms, bool count_advisories) {
  std::vector<IterationResult> results;
  for (const auto& it : trace) {
    IterationMonitor mon(spec, policy, silence_ms, it.index);
    for (const auto& rec : it.records) mon.observe(rec.direction, rec.datagram, rec.timestamp_ms);
    results.push_back(mon.finish(it.end_ms, it.index, it.seed));
  }
  if (count_advisories) fail_on_advisories(results);
  return make_report(spec.name, spec.role_under_test, "replay", policy, std::move(results));
}

}  // namespace quicheck
