#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/engine/state.hpp"
#include "quicheck/engine/verdict.hpp"

namespace quicheck {

enum class EndReason : std::uint8_t {
  kCleanClose,
  kExpectedError,
  kUnexpectedError,
  kTimeout,
  kViolation,
};

std::string_view end_reason_name(EndReason r);
EndReason parse_end_reason(std::string_view text);

struct IterationResult {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  EndReason end_reason = EndReason::kTimeout;
  std::uint64_t end_ms = 0;
  // Required checks: violations plus the reaction and goal verdicts.
  std::vector<Verdict> verdicts;
  // Tester-side violations the test provoked on purpose.
  std::vector<Verdict> stimuli;
  std::vector<Verdict> advisories;
  friend bool operator==(const IterationResult&, const IterationResult&) = default;
};

struct Report {
  std::string test;
  Role role_under_test = Role::kServer;
  std::string target;
  MigrationPolicy policy = MigrationPolicy::kAppLevelOnly;
  std::uint64_t iterations = 0;
  std::uint64_t passed = 0;
  double success_ratio = 0;  // percent
  // No iteration ran (empty trace).
  bool degenerate = false;
  std::map<std::string, std::uint64_t> histogram;
  std::map<std::string, std::uint64_t> advisory_histogram;
  std::vector<IterationResult> runs;
  std::string generated_at;  // ignored by operator==

  // Requirement with the most violations, "" when there are none.
  std::string top_violation() const;
  friend bool operator==(const Report& a, const Report& b);
};

// Aggregates results ordered by index.
Report make_report(std::string test, Role role_under_test, std::string target,
                   MigrationPolicy policy, std::vector<IterationResult> runs);

enum class ReportFormat : std::uint8_t { kText, kStructured };
// "text" | "structured" (also "json"). Throws InputError.
ReportFormat parse_report_format(std::string_view text);

std::string render_text(const Report& r);
std::string render_json(const Report& r);
// Throws InputError on malformed input.
Report parse_report_json(std::string_view text);

// Writes the report; throws IoError when the path is not writable.
void emit_report(const Report& r, ReportFormat format, const std::string& path);
Report load_report(const std::string& path);

// "97%" style percentage, one decimal when not integral.
std::string format_ratio(double percent);

}  // namespace quicheck
