#include <gtest/gtest.h>

#include <filesystem>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/harness/report.hpp"
#include "quicheck/harness/runner.hpp"
#include "quicheck/harness/sim_peer.hpp"
#include "quicheck/harness/trace.hpp"
#include "quicheck/harness/udp_link.hpp"
#include "quicheck/wire/error_codes.hpp"
#include "support.hpp"

using namespace quicheck;

namespace {

RunConfig config(std::string test, Role role, std::string sim = "conformant",
                 std::uint64_t iterations = 100) {
  RunConfig cfg;
  cfg.test = std::move(test);
  cfg.role_under_test = role;
  cfg.sim = SimPeerConfig::parse(sim);
  cfg.iterations = iterations;
  cfg.seed = 7;
  return cfg;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("quicheck_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed())))
      .string();
}

// CONNECTION_CLOSE frames the peer sent in one recorded iteration.
std::vector<ConnectionClose> peer_closes(const TraceIteration& it) {
  std::vector<ConnectionClose> out;
  for (const auto& r : it.records) {
    if (r.direction != Direction::kFromPeer) continue;
    for (const auto& d : decode_datagram(r.datagram.bytes, DecodeContext{})) {
      for (const auto& f : d.packet.frames) {
        if (const auto* c = std::get_if<ConnectionClose>(&f)) out.push_back(*c);
      }
    }
  }
  return out;
}

}  // namespace

TEST(SimPeerConfig, Parse) {
  EXPECT_TRUE(SimPeerConfig::parse("conformant").conformant());
  EXPECT_TRUE(SimPeerConfig::parse("defect:DecreasingPN").decreasing_pn);
  EXPECT_EQ(SimPeerConfig::parse("defect:WrongErrorCode").wrong_error_code,
            error_code::kInternalError);
  EXPECT_EQ(SimPeerConfig::parse("defect:WrongErrorCode=FLOW_CONTROL_ERROR").wrong_error_code,
            error_code::kFlowControlError);
  EXPECT_EQ(SimPeerConfig::parse("defect:SilentClose").describe(), "sim:defect:SilentClose");
  EXPECT_THROW(SimPeerConfig::parse("defect:Nope"), InputError);
  EXPECT_THROW(SimPeerConfig::parse("friendly"), InputError);
}

TEST(Runner, StreamAgainstConformantPeer) {
  const auto r = run_test(config("stream", Role::kServer));
  EXPECT_EQ(r.iterations, 100u);
  EXPECT_EQ(r.passed, 100u);
  EXPECT_EQ(r.success_ratio, 100.0);
  EXPECT_FALSE(r.degenerate);
  for (const auto& run : r.runs) EXPECT_EQ(run.end_reason, EndReason::kCleanClose);
}

TEST(Runner, StreamAgainstDecreasingPn) {
  const auto r = run_test(config("stream", Role::kServer, "defect:DecreasingPN"));
  EXPECT_EQ(r.passed, 0u);
  EXPECT_EQ(r.top_violation(), "PKT_PN_MONOTONIC");
}

TEST(Runner, SameConfigSameReport) {
  auto cfg = config("stream", Role::kClient, "conformant", 5);
  cfg.workers = 3;
  const auto a = run_test(cfg);
  cfg.workers = 1;
  const auto b = run_test(cfg);
  EXPECT_EQ(a, b);
  cfg.seed = 8;
  EXPECT_NE(run_test(cfg).runs, a.runs);
}

TEST(Runner, SingleIterationTranscriptRepeats) {
  const auto& spec = get_test("max", Role::kServer);
  const auto cfg = config("max", Role::kServer, "conformant", 1);
  TraceIteration a;
  TraceIteration b;
  run_sim_iteration(spec, cfg, 0, &a);
  run_sim_iteration(spec, cfg, 0, &b);
  EXPECT_FALSE(a.records.empty());
  EXPECT_EQ(format_trace({a}), format_trace({b}));
}

TEST(Runner, UnknownTest) {
  EXPECT_THROW(run_test(config("nonsense", Role::kServer)), InputError);
  auto cfg = config("stream", Role::kServer);
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(SimPeer, ClientNewTokenGetsProtocolViolation) {
  const auto& spec = get_test("new_token_err", Role::kServer);
  TraceIteration trace;
  const auto r = run_sim_iteration(spec, config("new_token_err", Role::kServer), 0, &trace);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.end_reason, EndReason::kExpectedError);
  const auto closes = peer_closes(trace);
  ASSERT_EQ(closes.size(), 1u);
  EXPECT_EQ(closes[0].error_code, error_code::kProtocolViolation);
}

TEST(SimPeer, WrongErrorCodeUsesConfiguredCode) {
  const auto& spec = get_test("new_token_err", Role::kServer);
  TraceIteration trace;
  const auto r = run_sim_iteration(
      spec, config("new_token_err", Role::kServer, "defect:WrongErrorCode=FLOW_CONTROL_ERROR"), 0,
      &trace);
  EXPECT_FALSE(r.passed);
  const auto closes = peer_closes(trace);
  ASSERT_EQ(closes.size(), 1u);
  EXPECT_EQ(closes[0].error_code, error_code::kFlowControlError);
}

TEST(SimPeer, UnknownTransportParameterIgnored) {
  const auto r = run_test(config("unkown_tp", Role::kServer, "conformant", 10));
  EXPECT_EQ(r.passed, 10u);
  for (const auto& run : r.runs) EXPECT_EQ(run.end_reason, EndReason::kCleanClose);
}

TEST(Replay, LiveAndReplayAgree) {
  const auto path = temp_path("trace");
  auto cfg = config("stream", Role::kServer, "defect:NeverPathChallenge", 10);
  cfg.trace_path = path;
  const auto live = run_test(cfg);
  const auto trace = load_trace(path);
  std::filesystem::remove(path);
  ASSERT_EQ(trace.size(), 10u);
  const auto replayed = replay_trace(trace, get_test("stream", Role::kServer), cfg.policy);
  EXPECT_EQ(replayed.runs, live.runs);
  EXPECT_EQ(replayed.histogram, live.histogram);
  EXPECT_EQ(replayed.target, "replay");
}

TEST(Replay, ConformantTraceHasNoViolations) {
  const auto& spec = get_test("stream", Role::kServer);
  TraceIteration t;
  run_sim_iteration(spec, config("stream", Role::kServer), 3, &t);
  const auto r = replay_trace(parse_trace(format_trace({t})), spec, MigrationPolicy::kAppLevelOnly);
  EXPECT_EQ(r.passed, 1u);
  EXPECT_TRUE(r.histogram.empty());
}

TEST(Replay, MigrationTraceDependsOnPolicy) {
  const auto& spec = get_test("stream", Role::kServer);
  TraceIteration t{0, 0, support::migration_ambiguity_records(), 100};
  const auto app = replay_trace({t}, spec, MigrationPolicy::kAppLevelOnly);
  const auto all = replay_trace({t}, spec, MigrationPolicy::kAllLevels);
  EXPECT_EQ(app.histogram.count("MIG_ADDR_TARGET"), 0u);
  EXPECT_EQ(all.histogram.count("MIG_ADDR_TARGET"), 1u);
}

TEST(Replay, EmptyTraceIsDegenerate) {
  const auto r = replay_trace({}, get_test("stream", Role::kServer), MigrationPolicy::kAppLevelOnly);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_TRUE(r.degenerate);
}

TEST(Trace, RoundTrip) {
  TraceIteration t{4, 99, support::migration_ambiguity_records(), 321};
  const auto text = format_trace({t, TraceIteration{5, 98, {}, 0}}, "test=stream");
  const auto back = parse_trace(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], t);
  EXPECT_EQ(back[1].index, 5u);
}

TEST(Trace, ParseErrorNamesLine) {
  try {
    parse_trace("iteration 0 1\ntester 5 127.0.0.1:1 127.0.0.1:2 zz\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_trace("tester 5 127.0.0.1:1 127.0.0.1:2 00\n"), InputError);
}

TEST(Report, Ratio) {
  std::vector<IterationResult> runs(100);
  for (std::uint64_t i = 0; i < 100; ++i) {
    runs[i].index = i;
    runs[i].passed = i >= 3;
    if (!runs[i].passed) {
      runs[i].verdicts.push_back(violation(req::kErrSilent, Direction::kFromPeer, 0, "x"));
    }
  }
  const auto r = make_report("stream", Role::kServer, "sim:conformant",
                             MigrationPolicy::kAppLevelOnly, runs);
  EXPECT_EQ(r.success_ratio, 97.0);
  EXPECT_EQ(format_ratio(r.success_ratio), "97%");
  EXPECT_EQ(format_ratio(100.0 / 3), "33.3%");
  EXPECT_NE(render_text(r).find("97%"), std::string::npos);
  EXPECT_EQ(r.histogram.at("ERR_SILENT"), 3u);
}

TEST(Report, JsonRoundTrip) {
  const auto r = run_test(config("tp_err", Role::kServer, "defect:WrongLevelClose", 3));
  const auto back = parse_report_json(render_json(r));
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.generated_at, r.generated_at);
  EXPECT_THROW(parse_report_json("{}"), InputError);
}

TEST(Report, EmitAndLoad) {
  const auto r = run_test(config("max", Role::kServer, "conformant", 2));
  const auto path = temp_path("report");
  emit_report(r, ReportFormat::kStructured, path);
  EXPECT_EQ(load_report(path), r);
  std::filesystem::remove(path);
  EXPECT_THROW(emit_report(r, ReportFormat::kText, "/nonexistent-dir/report.txt"), IoError);
}

TEST(UdpLink, BindFailure) {
  // Not a local address.
  EXPECT_THROW(UdpLink(Address{0x08080808, 9}), NetworkError);
}

TEST(UdpLink, LoopbackExchange) {
  UdpLink a(Address{kLoopback, 47311});
  UdpLink b(Address{kLoopback, 47312});
  a.send(Bytes{1, 2, 3}, b.local());
  const auto got = b.receive(std::chrono::milliseconds(500));
  ASSERT_TRUE(got);
  EXPECT_EQ(got->bytes, (Bytes{1, 2, 3}));
  EXPECT_EQ(got->src, a.local());
  EXPECT_FALSE(b.receive(std::chrono::milliseconds(10)));
}

TEST(Report, AdvisoriesOnlyCountWhenAsked) {
  std::vector<IterationResult> runs(2);
  for (std::uint64_t i = 0; i < 2; ++i) {
    runs[i].index = i;
    runs[i].passed = true;
  }
  runs[1].advisories.push_back(
      make_verdict(req::kAckOfAck, VerdictStatus::kViolation, Direction::kFromPeer, 0, "x"));
  auto lenient = make_report("stream", Role::kServer, "t", MigrationPolicy::kAppLevelOnly, runs);
  EXPECT_EQ(lenient.passed, 2u);
  EXPECT_EQ(lenient.advisory_histogram.at("ACK_OF_ACK"), 1u);
  EXPECT_TRUE(lenient.histogram.empty());
  fail_on_advisories(runs);
  auto strict = make_report("stream", Role::kServer, "t", MigrationPolicy::kAppLevelOnly, runs);
  EXPECT_EQ(strict.passed, 1u);
}
