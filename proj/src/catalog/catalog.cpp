#include "quicheck/catalog/catalog.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "quicheck/errors.hpp"
#include "quicheck/gen/mutations.hpp"
#include "quicheck/wire/error_codes.hpp"

namespace quicheck {

namespace embedded {
extern const std::string_view catalog_json;
}

namespace {

using nlohmann::json;

const std::map<std::string, std::uint64_t, std::less<>>& tp_names() {
  static const std::map<std::string, std::uint64_t, std::less<>> names = {
      {"max_idle_timeout", tp::kMaxIdleTimeout},
      {"max_udp_payload_size", tp::kMaxUdpPayloadSize},
      {"initial_max_data", tp::kInitialMaxData},
      {"initial_max_stream_data_bidi_local", tp::kInitialMaxStreamDataBidiLocal},
      {"initial_max_stream_data_bidi_remote", tp::kInitialMaxStreamDataBidiRemote},
      {"initial_max_stream_data_uni", tp::kInitialMaxStreamDataUni},
      {"initial_max_streams_bidi", tp::kInitialMaxStreamsBidi},
      {"initial_max_streams_uni", tp::kInitialMaxStreamsUni},
      {"ack_delay_exponent", tp::kAckDelayExponent},
      {"max_ack_delay", tp::kMaxAckDelay},
      {"active_connection_id_limit", tp::kActiveConnectionIdLimit},
  };
  return names;
}

std::uint64_t parse_number(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const auto n = std::stoull(s, &used, 0);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw InputError(what + ": expected a number, got " + v.dump());
}

std::uint64_t parse_code(const std::string& name, const std::string& test) {
  const auto code = error_code_from_name(name);
  if (!code) throw InputError("test '" + test + "': unknown error code '" + name + "'");
  return *code;
}

TestSpec parse_test(const json& t, const FixedParams& defaults) {
  TestSpec s;
  s.name = t.at("name").get<std::string>();
  auto where = [&](const std::string& field) { return "test '" + s.name + "' " + field; };
  s.role_under_test = parse_role(t.at("role").get<std::string>());
  s.reconstructed = t.value("reconstructed", true);
  s.description = t.value("description", "");
  for (const auto& f : t.at("frames")) {
    const auto kind = frame_kind_from_name(f.get<std::string>());
    if (!kind) throw InputError(where("frames") + ": unknown frame kind " + f.dump());
    s.plan.allowed.push_back(*kind);
  }
  if (t.contains("weights")) {
    for (const auto& [name, w] : t.at("weights").items()) {
      const auto kind = frame_kind_from_name(name);
      if (!kind) throw InputError(where("weights") + ": unknown frame kind '" + name + "'");
      if (!w.is_number()) throw InputError(where("weights") + ": weight must be a number");
      s.plan.weights[*kind] = w.get<double>();
    }
  }
  for (const auto& m : t.value("mutations", json::array())) {
    s.mutations.push_back({m.at("id").get<std::string>(), m.at("target").get<std::string>()});
    s.plan.mutations.push_back(s.mutations.back().id);
  }
  const auto& e = t.at("expected");
  s.expected.kind = parse_expected_kind(e.at("kind").get<std::string>());
  for (const auto& c : e.value("codes", json::array())) {
    s.expected.codes.push_back(parse_code(c.get<std::string>(), s.name));
  }
  s.goal = parse_goal(t.at("goal").get<std::string>());
  s.migration_allowed = t.value("migration_allowed", false);

  s.params = defaults;
  if (t.contains("params")) {
    const auto& p = t.at("params");
    for (const auto& x : p.value("extra_transport_params", json::array())) {
      s.params.extra_transport_params.push_back(
          {parse_number(x.at("id"), where("transport parameter id")),
           from_hex(x.value("value", ""))});
    }
    const json overrides = p.value("tester_params", json::object());
    for (const auto& [name, v] : overrides.items()) {
      const auto it = tp_names().find(name);
      if (it == tp_names().end()) throw InputError(where("tester_params") + ": unknown '" + name + "'");
      s.params.tester_params[it->second] = parse_number(v, where(name));
    }
    if (p.contains("close_after")) s.params.close_after = parse_number(p.at("close_after"), where("close_after"));
    if (p.contains("requests")) s.params.requests = parse_number(p.at("requests"), where("requests"));
  }
  return s;
}

}  // namespace

std::vector<std::string> TestSpec::stimulus_targets() const {
  std::vector<std::string> out;
  for (const auto& m : mutations) out.push_back(m.target);
  return out;
}

Catalog Catalog::parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("catalog is not valid JSON: ") + e.what());
  }
  Catalog c;
  try {
    if (doc.at("format") != "quicheck-catalog/1") {
      throw InputError("unsupported catalog format " + doc.at("format").dump());
    }
    FixedParams defaults;
    if (doc.contains("defaults")) {
      const auto& d = doc.at("defaults");
      if (d.contains("client_address")) defaults.client_address = Address::parse(d.at("client_address").get<std::string>());
      if (d.contains("server_address")) defaults.server_address = Address::parse(d.at("server_address").get<std::string>());
      if (d.contains("version")) defaults.version = static_cast<std::uint32_t>(parse_number(d.at("version"), "version"));
      if (d.contains("requests")) defaults.requests = parse_number(d.at("requests"), "requests");
    }
    for (const auto& t : doc.at("tests")) {
      auto spec = parse_test(t, defaults);
      for (const auto& existing : c.tests_) {
        if (existing.name == spec.name && existing.role_under_test == spec.role_under_test) {
          throw InputError("duplicate test '" + spec.name + "' for role " +
                           std::string(role_name(spec.role_under_test)));
        }
      }
      c.tests_.push_back(std::move(spec));
    }
    for (const auto& a : doc.value("aliases", json::array())) {
      c.aliases_.emplace_back(parse_role(a.at("role").get<std::string>()),
                              a.at("alias").get<std::string>(), a.at("name").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("catalog schema error: ") + e.what());
  }
  return c;
}

Catalog Catalog::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read catalog file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> Catalog::list(Role role) const {
  std::vector<std::string> out;
  for (const auto& t : tests_) {
    if (t.role_under_test == role) out.push_back(t.name);
  }
  return out;
}

const TestSpec& Catalog::get(std::string_view name, Role role) const {
  std::string_view target = name;
  for (const auto& [r, alias, real] : aliases_) {
    if (r == role && alias == name) target = real;
  }
  for (const auto& t : tests_) {
    if (t.role_under_test == role && t.name == target) return t;
  }
  throw InputError("no " + std::string(role_name(role)) + " test named '" + std::string(name) + "'");
}

std::vector<std::string> Catalog::validate(const RequirementRegistry& registry) const {
  std::vector<std::string> defects;
  for (const auto& t : tests_) {
    const std::string where = std::string(role_name(t.role_under_test)) + "/" + t.name + ": ";
    if (auto why = t.plan.validate(); !why.empty()) defects.push_back(where + why);
    for (const auto& m : t.mutations) {
      if (!registry.contains(m.target)) {
        defects.push_back(where + "mutation " + m.id + " cites unregistered requirement " + m.target);
      }
      const auto* known = find_mutation(m.id);
      if (!known) {
        defects.push_back(where + "unknown mutation " + m.id);
      } else {
        if (known->target != m.target) {
          defects.push_back(where + "mutation " + m.id + " targets " + known->target + ", not " + m.target);
        }
        if (!known->any_sender && known->sender != t.tester_role()) {
          defects.push_back(where + "mutation " + m.id + " cannot be sent by a " +
                            std::string(role_name(t.tester_role())));
        }
      }
    }
    for (const auto code : t.expected.codes) {
      if (!is_known_error_code(code)) defects.push_back(where + "unknown error code " + std::to_string(code));
    }
    if (t.expected.carries_codes() && t.expected.codes.empty()) {
      defects.push_back(where + "expected outcome lists no error code");
    }
    if (t.adversarial() && !t.expected.carries_codes()) {
      defects.push_back(where + "adversarial test expects no error");
    }
    if (!t.adversarial() && t.expected.carries_codes()) {
      defects.push_back(where + "expects an error without a stimulus");
    }
    if (t.migration_allowed && t.role_under_test == Role::kClient) {
      defects.push_back(where + "client tests must not migrate");
    }
    if (t.tester_role() == Role::kClient) {
      for (const auto k : {FrameKind::kHandshakeDone, FrameKind::kNewToken}) {
        if (t.plan.allows(k)) {
          defects.push_back(where + "a client may not send " + std::string(frame_kind_name(k)));
        }
      }
    }
  }
  for (const auto& [role, alias, real] : aliases_) {
    const auto names = list(role);
    if (std::find(names.begin(), names.end(), real) == names.end()) {
      defects.push_back("alias " + alias + " points to missing test " + real);
    }
  }
  return defects;
}

const Catalog& default_catalog() {
  static const Catalog catalog = [] {
    if (const char* path = std::getenv("QUICHECK_CATALOG"); path && *path) {
      return Catalog::load_file(path);
    }
    return Catalog::parse(embedded::catalog_json);
  }();
  return catalog;
}

std::vector<std::string> list_tests(Role role) { return default_catalog().list(role); }

std::vector<std::string> list_tests(std::string_view role) { return list_tests(parse_role(role)); }

const TestSpec& get_test(std::string_view name, Role role) { return default_catalog().get(name, role); }

std::vector<std::string> validate_catalog() { return default_catalog().validate(default_registry()); }

}  // namespace quicheck
