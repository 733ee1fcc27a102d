#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/gen/generator.hpp"
#include "quicheck/gen/mutations.hpp"
#include "quicheck/harness/runner.hpp"
#include "quicheck/harness/tester.hpp"
#include "support.hpp"

using namespace quicheck;
using support::kClientAddr;
using support::kServerAddr;
using support::Script;

namespace {

// Tester is the client; the server sent HANDSHAKE_DONE and a PATH_CHALLENGE,
// so ACK and PATH_RESPONSE are both legal.
ConnectionState weighted_state() {
  Script s(Role::kClient);
  s.handshake();
  s.send(Endpoint::kPeer,
         {s.packet(Endpoint::kPeer, PacketType::kOneRtt, {PathChallenge{{1, 2, 3, 4, 5, 6, 7, 8}}})});
  return support::replay(s.records, Role::kClient).state;
}

GenerationPlan four_kind_plan() {
  GenerationPlan plan;
  plan.allowed = {FrameKind::kPathResponse, FrameKind::kStream, FrameKind::kAck, FrameKind::kCrypto};
  plan.weights[FrameKind::kPathResponse] = 5;
  return plan;
}

SendQueue queue_with_stream() {
  SendQueue q;
  q.add_stream(0, Bytes(5000, 0x61));
  return q;
}

std::set<std::uint64_t> acked_numbers(const Ack& a) {
  std::set<std::uint64_t> out;
  std::uint64_t hi = a.largest;
  std::uint64_t lo = a.largest - a.first_range;
  for (auto n = lo; n <= hi; ++n) out.insert(n);
  for (const auto& r : a.ranges) {
    hi = lo - r.gap - 2;
    lo = hi - r.length;
    for (auto n = lo; n <= hi; ++n) out.insert(n);
  }
  return out;
}

// Upper critical values of the chi-square distribution at alpha = 0.01.
constexpr double kChi2Df1 = 6.635;
constexpr double kChi2Df3 = 11.345;

}  // namespace

TEST(Sampler, PathResponseWeightFive) {
  const auto st = weighted_state();
  auto q = queue_with_stream();
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, &q};
  const auto plan = four_kind_plan();
  for (auto k : plan.allowed) ASSERT_TRUE(kind_legal(k, ctx)) << frame_kind_name(k);

  Rng rng(2024);
  constexpr int kDraws = 80000;
  std::map<FrameKind, int> counts;
  for (int i = 0; i < kDraws; ++i) ++counts[sample_frame_kind(plan, rng, ctx)];
  ASSERT_EQ(counts.size(), 4u);

  const double e_pr = kDraws * 5.0 / 8.0;
  const double o_pr = counts[FrameKind::kPathResponse];
  const double chi1 = (o_pr - e_pr) * (o_pr - e_pr) / e_pr +
                      (o_pr - e_pr) * (o_pr - e_pr) / (kDraws - e_pr);
  EXPECT_LT(chi1, kChi2Df1);

  double chi3 = 0;
  for (auto [k, n] : counts) {
    const double e = kDraws * plan.weight(k) / 8.0;
    chi3 += (n - e) * (n - e) / e;
  }
  EXPECT_LT(chi3, kChi2Df3);
}

TEST(Sampler, SingleKind) {
  const auto st = weighted_state();
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, nullptr};
  GenerationPlan plan;
  plan.allowed = {FrameKind::kPing};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_frame_kind(plan, rng, ctx), FrameKind::kPing);
}

TEST(Sampler, ZeroWeightNeverDrawn) {
  const auto st = weighted_state();
  auto q = queue_with_stream();
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, &q};
  auto plan = four_kind_plan();
  plan.weights[FrameKind::kAck] = 0;
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) ASSERT_NE(sample_frame_kind(plan, rng, ctx), FrameKind::kAck);
}

TEST(Sampler, NothingLegal) {
  const ConnectionState st(Role::kClient, MigrationPolicy::kAppLevelOnly);
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, nullptr};
  GenerationPlan plan;
  plan.allowed = {FrameKind::kPathResponse};
  Rng rng(1);
  EXPECT_THROW(sample_frame_kind(plan, rng, ctx), ExhaustionError);
}

TEST(Synthesize, PathResponseEchoesChallenge) {
  const auto st = weighted_state();
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, nullptr};
  Rng rng(4);
  const auto f = synthesize_frame(FrameKind::kPathResponse, ctx, rng, 100);
  EXPECT_EQ(std::get<PathResponse>(f).data, (PathData{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(Synthesize, StreamRespectsMaxData) {
  Script s(Role::kClient);
  auto sp = default_transport_params(Role::kServer, s.server_cid, s.server_cid);
  sp.set_integer(tp::kInitialMaxData, 1000);
  s.handshake(default_transport_params(Role::kClient, s.client_cid, {}), sp);
  s.send(Endpoint::kTester,
         {s.packet(Endpoint::kTester, PacketType::kOneRtt, {Stream{0, 0, false, Bytes(600, 1)}})});
  const auto st = support::replay(s.records, Role::kClient).state;
  ASSERT_EQ(st.peer().flow.consumed, 600u);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SendQueue q;
    q.add_stream(4, Bytes(3000, 2));
    const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, &q};
    Rng rng(seed);
    const auto f = std::get<Stream>(synthesize_frame(FrameKind::kStream, ctx, rng, 1100));
    ASSERT_LE(f.offset + f.data.size(), 400u);
    auto after = st;
    const auto vs = frame_event(after, f,
                                PacketContext{Direction::kFromTester, PacketType::kOneRtt, 9,
                                              kClientAddr, kServerAddr, 0});
    ASSERT_TRUE(support::violated_ids(vs).empty());
  }
}

TEST(Synthesize, AckCoversOnlyReceived) {
  Script s(Role::kClient);
  s.handshake();  // server application PN 0 carries HANDSHAKE_DONE
  s.send(Endpoint::kPeer, {s.packet(Endpoint::kPeer, PacketType::kOneRtt, {Ping{}})});
  s.send(Endpoint::kPeer, {s.packet(Endpoint::kPeer, PacketType::kOneRtt, {Ping{}})});
  s.next_pn[1 * kPnSpaceCount + 2] = 5;
  s.send(Endpoint::kPeer, {s.packet(Endpoint::kPeer, PacketType::kOneRtt, {Ping{}})});
  const auto st = support::replay(s.records, Role::kClient).state;
  const std::set<std::uint64_t> received{0, 1, 2, 5};

  const auto full = ack_for(st, Endpoint::kTester, PnSpace::kApplication);
  ASSERT_TRUE(full);
  EXPECT_EQ(acked_numbers(*full), received);

  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, nullptr};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto a = std::get<Ack>(synthesize_frame(FrameKind::kAck, ctx, rng, 200));
    const auto got = acked_numbers(a);
    ASSERT_TRUE(std::includes(received.begin(), received.end(), got.begin(), got.end()));
  }
}

TEST(BuildPacket, InitialPhase) {
  const ConnectionState st(Role::kClient, MigrationPolicy::kAppLevelOnly);
  SendQueue q;
  q.push_crypto(PnSpace::kInitial, Bytes{1, 0, 0, 2, 9, 9});
  const GenContext ctx{st, Endpoint::kTester, PacketType::kInitial, &q};
  Rng rng(1);
  const auto p = build_packet(ctx, GenerationPlan{}, rng, HeaderTemplate{ConnectionId(Bytes(8, 1)),
                                                                         ConnectionId(Bytes(8, 2))});
  EXPECT_EQ(p.type, PacketType::kInitial);
  EXPECT_EQ(p.version, 0xff00001du);
  ASSERT_EQ(p.frames.size(), 1u);
  EXPECT_EQ(std::get<Crypto>(p.frames[0]).data, (Bytes{1, 0, 0, 2, 9, 9}));
  EXPECT_FALSE(q.has_crypto(PnSpace::kInitial));
}

TEST(BuildPacket, EmptyBudgetThrows) {
  const auto st = weighted_state();
  const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, nullptr};
  GenerationPlan plan;
  plan.allowed = {FrameKind::kPing};
  plan.max_datagram = 0;
  Rng rng(1);
  EXPECT_THROW(build_packet(ctx, plan, rng, HeaderTemplate{ConnectionId(Bytes(8, 1)), {}}),
               ExhaustionError);
  const GenContext hs{st, Endpoint::kTester, PacketType::kHandshake, nullptr};
  EXPECT_THROW(build_packet(hs, plan, rng, HeaderTemplate{}), ExhaustionError);
}

TEST(BuildPacket, CatalogPlansStayClean) {
  for (const auto& spec : default_catalog().tests()) {
    if (spec.adversarial()) continue;
    const Role tr = spec.tester_role();
    const Endpoint me = Endpoint::kTester;
    const Endpoint them = Endpoint::kPeer;
    Script s(tr);
    s.handshake();
    SendQueue q;
    if (tr == Role::kServer) {
      for (std::uint64_t i = 0; i < 3; ++i) {
        s.send(them, {s.packet(them, PacketType::kOneRtt, {Stream{4 * i, 0, true, to_bytes("GET /\r\n")}})});
        q.add_stream(4 * i, Bytes(3000, 0x62));
      }
    } else {
      for (std::uint64_t i = 0; i < 3; ++i) q.add_stream(4 * i, to_bytes("GET /index.html\r\n"));
    }
    auto st = support::replay(s.records, tr).state;
    const HeaderTemplate h{tr == Role::kClient ? s.server_cid : s.client_cid, {}};
    Rng rng(17);
    const Address src = s.address_of(me);
    const Address dst = s.address_of(them);
    int built = 0;
    for (int i = 0; i < 1000; ++i) {
      const GenContext ctx{st, me, PacketType::kOneRtt, &q};
      Packet p;
      try {
        p = build_packet(ctx, spec.plan, rng, h);
      } catch (const ExhaustionError&) {
        continue;
      }
      ++built;
      const auto r = ingest_datagram(st, Direction::kFromTester, src, dst, encode_datagram({p}), 100 + i);
      for (const auto& v : r.verdicts) {
        if (v.violation() && !default_registry().is_advisory(v.requirement)) {
          FAIL() << spec.name << ": " << v.requirement << " " << v.detail;
        }
      }
    }
    EXPECT_GT(built, 0) << spec.name;
  }
}

TEST(Mutations, InitialToken) {
  const ConnectionState st(Role::kClient, MigrationPolicy::kAppLevelOnly);
  Packet p;
  p.type = PacketType::kInitial;
  p.frames = {Ping{}};
  Rng rng(1);
  const auto m = apply_mutation(*find_mutation("NonzeroInitialToken"), p, rng, st);
  ASSERT_TRUE(m);
  EXPECT_GT(m->token.size(), 0u);
}

TEST(Mutations, ZeroLengthNewToken) {
  const ConnectionState st(Role::kServer, MigrationPolicy::kAppLevelOnly);
  Packet p;
  p.frames = {Ping{}};
  Rng rng(1);
  const auto m = apply_mutation(*find_mutation("ZeroLengthNewToken"), p, rng, st);
  ASSERT_TRUE(m);
  const auto it = std::find_if(m->frames.begin(), m->frames.end(),
                               [](const Frame& f) { return std::holds_alternative<NewToken>(f); });
  ASSERT_NE(it, m->frames.end());
  EXPECT_TRUE(std::get<NewToken>(*it).token.empty());
}

TEST(Mutations, NewCidRetireGreater) {
  const auto st = weighted_state();
  Packet p;
  p.frames = {Ping{}};
  Rng rng(1);
  const auto m = apply_mutation(*find_mutation("NewCidRetireGreater"), p, rng, st);
  ASSERT_TRUE(m);
  const auto it = std::find_if(m->frames.begin(), m->frames.end(), [](const Frame& f) {
    return std::holds_alternative<NewConnectionId>(f);
  });
  ASSERT_NE(it, m->frames.end());
  const auto& n = std::get<NewConnectionId>(*it);
  EXPECT_GT(n.retire_prior_to, n.sequence);
}

TEST(Mutations, WrongSenderSkipped) {
  const ConnectionState st(Role::kServer, MigrationPolicy::kAppLevelOnly);
  Packet p;
  p.type = PacketType::kInitial;
  p.frames = {Ping{}};
  Rng rng(1);
  EXPECT_FALSE(apply_mutation(*find_mutation("NonzeroInitialToken"), p, rng, st));
}

// Every mutation the catalog ships, run through the simulated peer: the
// tester's own traffic violates the target and nothing else.
TEST(Mutations, FlagExactlyTheirTarget) {
  std::set<std::string> covered;
  for (const auto& spec : default_catalog().tests()) {
    for (const auto& m : spec.mutations) {
      RunConfig cfg;
      cfg.test = spec.name;
      cfg.role_under_test = spec.role_under_test;
      cfg.seed = 5;
      for (std::uint64_t i = 0; i < 5; ++i) {
        const auto r = run_sim_iteration(spec, cfg, i);
        ASSERT_FALSE(r.stimuli.empty()) << spec.name;
        for (const auto& v : r.stimuli) ASSERT_EQ(v.requirement, m.target) << spec.name;
        for (const auto& v : r.verdicts) {
          ASSERT_FALSE(v.violation() && v.direction == Direction::kFromTester)
              << spec.name << ": " << v.requirement;
        }
      }
      covered.insert(m.id);
    }
  }
  EXPECT_FALSE(covered.empty());
}

TEST(Mutations, TableTargetsRegistered) {
  for (const auto& m : mutation_table()) {
    EXPECT_TRUE(default_registry().contains(m.target)) << m.id;
  }
}

TEST(Generation, Reproducible) {
  auto run = [](std::uint64_t seed) {
    const auto st = weighted_state();
    auto q = queue_with_stream();
    const GenContext ctx{st, Endpoint::kTester, PacketType::kOneRtt, &q};
    Rng rng(seed);
    return encode_packet(build_packet(ctx, four_kind_plan(), rng, HeaderTemplate{ConnectionId(Bytes(8, 1)), {}}));
  };
  EXPECT_EQ(run(99), run(99));
  EXPECT_NE(run(99), run(100));
}
