#include <gtest/gtest.h>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"

using namespace quicheck;

namespace {

const std::vector<std::string> kServerRows = {
    "stream",           "max",           "reset_stream",   "connection_close", "stop_sending",
    "accept_maxdata",   "unknown",       "unkown_tp",      "double_tp_err",    "tp_err",
    "tp_acticoid_err",  "no_icid_err",   "token_err",      "new_token_err",    "handshake_done_err",
    "newcid_err",       "max_limit_err", "blocked_err",    "retirecid_err",    "stream_limit_err",
    "newcid_length_err", "newcid_rtp_err", "max_err"};

const std::vector<std::string> kClientRows = {
    "stream",         "max",       "accept_maxdata",   "unkown",           "tp_unkown",
    "double_tp_error", "tp_error", "tp_acticoid_error", "no_ocid",         "tp_prefadd_error",
    "blocked_error",  "retirecoid_error", "new_token_error", "limit_max_error"};

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string minimal_catalog(const std::string& test_body) {
  return R"({"format":"quicheck-catalog/1","tests":[)" + test_body + "]}";
}

}  // namespace

TEST(Catalog, ServerRows) {
  const auto names = list_tests(Role::kServer);
  EXPECT_EQ(names.size(), 23u);
  EXPECT_EQ(sorted(names), sorted(kServerRows));
}

TEST(Catalog, ClientRows) {
  const auto names = list_tests("client");
  EXPECT_EQ(names.size(), 14u);
  EXPECT_EQ(sorted(names), sorted(kClientRows));
}

TEST(Catalog, UnknownRole) { EXPECT_THROW(list_tests("router"), InputError); }

TEST(Catalog, Defaults) {
  for (const auto& t : default_catalog().tests()) {
    EXPECT_EQ(t.params.client_address.port, 4987) << t.name;
    EXPECT_EQ(t.params.server_address.port, 4443) << t.name;
    EXPECT_EQ(t.params.client_address.ip, kLoopback);
    EXPECT_EQ(t.params.version, 0xff00001du) << t.name;
  }
}

TEST(Catalog, StreamPlan) {
  const auto& t = get_test("stream", Role::kServer);
  std::vector<FrameKind> want = {FrameKind::kStream, FrameKind::kAck, FrameKind::kPathResponse,
                                 FrameKind::kCrypto};
  auto got = t.plan.allowed;
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, want);
  EXPECT_EQ(t.plan.weight(FrameKind::kPathResponse), 5);
  EXPECT_EQ(t.plan.weight(FrameKind::kStream), 1);
  EXPECT_EQ(t.expected.kind, ExpectedOutcome::Kind::kCleanClose);
  EXPECT_FALSE(t.adversarial());
}

TEST(Catalog, UnknownTransportParameterIgnored) {
  const auto& t = get_test("unkown_tp", Role::kServer);
  EXPECT_EQ(t.expected.kind, ExpectedOutcome::Kind::kIgnored);
  ASSERT_FALSE(t.params.extra_transport_params.empty());
  EXPECT_FALSE(tp::is_known(t.params.extra_transport_params.front().id));
}

TEST(Catalog, PreferredAddressAlias) {
  const auto& t = get_test("prefadd_error", Role::kClient);
  EXPECT_EQ(t.name, "tp_prefadd_error");
  EXPECT_EQ(t.expected.kind, ExpectedOutcome::Kind::kTransportError);
  ASSERT_FALSE(t.expected.codes.empty());
  EXPECT_EQ(t.expected.codes.front(), error_code::kTransportParameterError);
  ASSERT_EQ(t.mutations.size(), 1u);
  EXPECT_EQ(t.mutations[0].target, req::kTpPrefaddCid);
}

TEST(Catalog, UnknownName) {
  EXPECT_THROW(get_test("nonsense", Role::kServer), InputError);
  EXPECT_THROW(get_test("tp_prefadd_error", Role::kServer), InputError);
}

TEST(Catalog, ShippedCatalogIsSound) { EXPECT_TRUE(validate_catalog().empty()); }

TEST(Catalog, UnregisteredRequirementIsADefect) {
  const auto c = Catalog::parse(minimal_catalog(R"({"name":"x","role":"server","frames":["PING"],
      "mutations":[{"id":"ClientNewToken","target":"NOT_A_REQUIREMENT"}],
      "expected":{"kind":"transport_error","codes":["PROTOCOL_VIOLATION"]},
      "goal":"stimulus_delivered"})"));
  const auto defects = c.validate(default_registry());
  ASSERT_FALSE(defects.empty());
  EXPECT_NE(defects.front().find("NOT_A_REQUIREMENT"), std::string::npos);
}

TEST(Catalog, AllZeroWeightsIsADefect) {
  const auto c = Catalog::parse(minimal_catalog(R"({"name":"x","role":"server","frames":["PING","ACK"],
      "weights":{"PING":0,"ACK":0},"mutations":[],
      "expected":{"kind":"clean_close"},"goal":"all_data_delivered"})"));
  EXPECT_FALSE(c.validate(default_registry()).empty());
}

TEST(Catalog, SchemaErrors) {
  EXPECT_THROW(Catalog::parse("not json"), InputError);
  EXPECT_THROW(Catalog::parse(minimal_catalog(R"({"name":"x","role":"server","frames":["WARP"]})")),
               InputError);
}

TEST(Catalog, EveryAdversarialTestHasTargets) {
  for (const auto& t : default_catalog().tests()) {
    if (!t.adversarial()) continue;
    EXPECT_FALSE(t.stimulus_targets().empty()) << t.name;
    if (t.expected.carries_codes()) EXPECT_FALSE(t.expected.codes.empty()) << t.name;
  }
}
