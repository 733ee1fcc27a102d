#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/engine/address.hpp"
#include "quicheck/engine/requirements.hpp"
#include "quicheck/engine/state.hpp"
#include "quicheck/engine/verdict.hpp"
#include "quicheck/gen/plan.hpp"
#include "quicheck/wire/transport_params.hpp"

namespace quicheck {

struct MutationRef {
  std::string id;
  std::string target;
  friend bool operator==(const MutationRef&, const MutationRef&) = default;
};

struct FixedParams {
  Address client_address{kLoopback, 4987};
  Address server_address{kLoopback, 4443};
  std::uint32_t version = kDraft29Version;
  std::uint64_t requests = 10;
  // Added verbatim to the tester's hello.
  std::vector<TransportParameter> extra_transport_params;
  // Overrides of the tester's own integer transport parameters.
  std::map<std::uint64_t, std::uint64_t> tester_params;
  // Tester closes once this many requests were answered.
  std::optional<std::uint64_t> close_after;
  friend bool operator==(const FixedParams&, const FixedParams&) = default;
};

struct TestSpec {
  std::string name;
  Role role_under_test = Role::kServer;
  bool reconstructed = true;
  std::string description;
  GenerationPlan plan;
  std::vector<MutationRef> mutations;
  FixedParams params;
  Goal goal = Goal::kAllDataDelivered;
  ExpectedOutcome expected;
  bool migration_allowed = false;

  Role tester_role() const { return opposite(role_under_test); }
  bool adversarial() const { return !mutations.empty(); }
  // Requirement ids the tester violates on purpose.
  std::vector<std::string> stimulus_targets() const;
};

class Catalog {
 public:
  // Throws InputError on schema errors.
  static Catalog parse(std::string_view json_text);
  static Catalog load_file(const std::string& path);

  std::vector<std::string> list(Role role) const;
  // Resolves aliases. Throws InputError for unknown names.
  const TestSpec& get(std::string_view name, Role role) const;
  const std::vector<TestSpec>& tests() const noexcept { return tests_; }
  // Human-readable defects; empty for a sound catalog.
  std::vector<std::string> validate(const RequirementRegistry& registry) const;

 private:
  std::vector<TestSpec> tests_;
  std::vector<std::tuple<Role, std::string, std::string>> aliases_;
};

// Embedded catalog, or the file named by QUICHECK_CATALOG when set.
const Catalog& default_catalog();

std::vector<std::string> list_tests(Role role);
// Accepts "client" / "server"; throws InputError otherwise.
std::vector<std::string> list_tests(std::string_view role);
const TestSpec& get_test(std::string_view name, Role role);
std::vector<std::string> validate_catalog();

}  // namespace quicheck
