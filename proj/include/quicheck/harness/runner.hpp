#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/monitor.hpp"
#include "quicheck/harness/datagram.hpp"
#include "quicheck/harness/report.hpp"
#include "quicheck/harness/sim_peer.hpp"
#include "quicheck/harness/trace.hpp"

namespace quicheck {

struct RunConfig {
  std::string test;
  Role role_under_test = Role::kServer;
  // UDP target; the simulated peer is used when unset.
  std::optional<Address> udp_target;
  SimPeerConfig sim;
  std::uint64_t iterations = 100;
  std::uint64_t seed = 0;
  MigrationPolicy policy = MigrationPolicy::kAppLevelOnly;
  // How long the implementation may stay quiet after the stimulus before it
  // counts as silent.
  std::uint64_t silence_ms = kDefaultSilenceMs;
  std::size_t workers = 1;
  // Advisory findings fail the iteration too. Off by default.
  bool count_advisories = false;
  // When set, every iteration's datagrams are written here.
  std::string trace_path;

  std::string target_description() const;
  // Throws InputError.
  void validate() const;
};

inline std::uint64_t iteration_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

// Judges one iteration from the datagrams it is shown. Live runs and trace
// replay drive the same object, so both produce the same verdicts.
class IterationMonitor {
 public:
  IterationMonitor(const TestSpec& spec, MigrationPolicy policy, std::uint64_t silence_ms,
                   std::uint64_t tag);

  // Ignored once stopped().
  IngestResult observe(Direction dir, const Datagram& d, std::uint64_t now_ms);
  IterationResult finish(std::uint64_t end_ms, std::uint64_t index, std::uint64_t seed);

  // A required violation nobody asked for was seen.
  bool stopped() const { return stopped_; }
  const ConnectionState& state() const { return state_; }
  std::optional<std::uint64_t> stimulus_ms() const { return stimulus_ms_; }
  const std::vector<TraceRecord>& log() const { return log_; }

 private:
  const TestSpec& spec_;
  std::vector<std::string> targets_;
  std::uint64_t silence_ms_;
  ConnectionState state_;
  std::vector<Verdict> violations_;
  std::vector<Verdict> stimuli_;
  std::vector<Verdict> advisories_;
  std::vector<TraceRecord> log_;
  std::optional<std::uint64_t> stimulus_ms_;
  bool peer_after_stimulus_ = false;
  bool stopped_ = false;
};

// One iteration against the in-process simulated peer, on a virtual clock.
IterationResult run_sim_iteration(const TestSpec& spec, const RunConfig& cfg, std::uint64_t index,
                                  TraceIteration* record = nullptr);

// Throws InputError for unknown tests or bad configs and NetworkError when
// the UDP target cannot be used.
Report run_test(const RunConfig& cfg);

// Re-judges recorded iterations; generation is skipped.
Report replay_trace(const std::vector<TraceIteration>& trace, const TestSpec& spec,
                    MigrationPolicy policy, std::uint64_t silence_ms = kDefaultSilenceMs,
                    bool count_advisories = false);

// Marks iterations with advisory findings as failed.
void fail_on_advisories(std::vector<IterationResult>& results);

}  // namespace quicheck
