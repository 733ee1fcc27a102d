#include "quicheck/harness/report.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "quicheck/errors.hpp"

namespace quicheck {

namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "quicheck-report/1";

constexpr std::array<std::string_view, 5> kEndReasonNames = {
    "clean_close", "expected_error", "unexpected_error", "timeout", "violation"};

json verdicts_to_json(const std::vector<Verdict>& vs) {
  json out = json::array();
  for (const auto& v : vs) {
    out.push_back({{"requirement", v.requirement},
                   {"status", v.violation() ? "violation" : "pass"},
                   {"direction", direction_name(v.direction)},
                   {"event_index", v.event_index},
                   {"detail", v.detail}});
  }
  return out;
}

Direction parse_direction(std::string_view s) {
  if (s == direction_name(Direction::kFromTester)) return Direction::kFromTester;
  if (s == direction_name(Direction::kFromPeer)) return Direction::kFromPeer;
  throw InputError("unknown direction '" + std::string(s) + "'");
}

std::vector<Verdict> verdicts_from_json(const json& arr) {
  std::vector<Verdict> out;
  for (const auto& j : arr) {
    Verdict v;
    v.requirement = j.at("requirement").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status != "pass" && status != "violation") throw InputError("bad verdict status " + status);
    v.status = status == "pass" ? VerdictStatus::kPass : VerdictStatus::kViolation;
    v.direction = parse_direction(j.at("direction").get<std::string>());
    v.event_index = j.at("event_index").get<std::uint64_t>();
    v.detail = j.at("detail").get<std::string>();
    out.push_back(std::move(v));
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::string_view end_reason_name(EndReason r) { return kEndReasonNames[static_cast<std::size_t>(r)]; }

EndReason parse_end_reason(std::string_view text) {
  for (std::size_t i = 0; i < kEndReasonNames.size(); ++i) {
    if (kEndReasonNames[i] == text) return static_cast<EndReason>(i);
  }
  throw InputError("unknown end reason '" + std::string(text) + "'");
}

std::string Report::top_violation() const {
  std::string best;
  std::uint64_t count = 0;
  for (const auto& [id, n] : histogram) {
    if (n > count) {
      best = id;
      count = n;
    }
  }
  return best;
}

bool operator==(const Report& a, const Report& b) {
  return a.test == b.test && a.role_under_test == b.role_under_test && a.target == b.target &&
         a.policy == b.policy && a.iterations == b.iterations && a.passed == b.passed &&
         a.success_ratio == b.success_ratio && a.degenerate == b.degenerate &&
         a.histogram == b.histogram && a.advisory_histogram == b.advisory_histogram &&
         a.runs == b.runs;
}

Report make_report(std::string test, Role role_under_test, std::string target,
                   MigrationPolicy policy, std::vector<IterationResult> runs) {
  Report r;
  r.test = std::move(test);
  r.role_under_test = role_under_test;
  r.target = std::move(target);
  r.policy = policy;
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  r.iterations = runs.size();
  r.degenerate = runs.empty();
  for (const auto& run : runs) {
    if (run.passed) ++r.passed;
    for (const auto& v : run.verdicts) {
      if (v.violation()) ++r.histogram[v.requirement];
    }
    for (const auto& v : run.advisories) ++r.advisory_histogram[v.requirement];
  }
  r.success_ratio = r.iterations == 0 ? 0.0
                                      : 100.0 * static_cast<double>(r.passed) /
                                            static_cast<double>(r.iterations);
  r.runs = std::move(runs);
  r.generated_at = utc_now();
  return r;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::kText;
  if (text == "structured" || text == "json") return ReportFormat::kStructured;
  throw InputError("--format expects text or structured, got '" + std::string(text) + "'");
}

std::string format_ratio(double percent) {
  std::ostringstream os;
  if (percent == std::floor(percent)) {
    os << static_cast<std::uint64_t>(percent) << '%';
  } else {
    os << std::fixed << std::setprecision(1) << percent << '%';
  }
  return os.str();
}

std::string render_text(const Report& r) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "test" << std::setw(8) << "role" << std::setw(44)
     << "target" << std::setw(12) << "iterations" << std::setw(8) << "passed"
     << "ratio\n";
  os << std::setw(20) << r.test << std::setw(8) << role_name(r.role_under_test) << std::setw(44)
     << r.target << std::setw(12) << r.iterations << std::setw(8) << r.passed
     << format_ratio(r.success_ratio) << '\n';
  if (r.degenerate) os << "degenerate: no iterations\n";
  auto table = [&](std::string_view title, const std::map<std::string, std::uint64_t>& h) {
    if (h.empty()) return;
    os << title << ":\n";
    for (const auto& [id, n] : h) os << "  " << std::setw(26) << id << n << '\n';
  };
  table("violations", r.histogram);
  table("advisories", r.advisory_histogram);
  return os.str();
}

std::string render_json(const Report& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"index", run.index},
                    {"seed", run.seed},
                    {"outcome", run.passed ? "pass" : "fail"},
                    {"end_reason", end_reason_name(run.end_reason)},
                    {"end_ms", run.end_ms},
                    {"verdicts", verdicts_to_json(run.verdicts)},
                    {"stimuli", verdicts_to_json(run.stimuli)},
                    {"advisories", verdicts_to_json(run.advisories)}});
  }
  json j = {{"format", kFormat},
            {"test", r.test},
            {"role", role_name(r.role_under_test)},
            {"target", r.target},
            {"policy", policy_name(r.policy)},
            {"iterations", r.iterations},
            {"passed", r.passed},
            {"success_ratio", r.success_ratio},
            {"degenerate", r.degenerate},
            {"histogram", r.histogram},
            {"advisory_histogram", r.advisory_histogram},
            {"runs", std::move(runs)},
            {"generated_at", r.generated_at}};
  return j.dump(2) + "\n";
}

Report parse_report_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw InputError("not a quicheck report");
    Report r;
    r.test = j.at("test").get<std::string>();
    r.role_under_test = parse_role(j.at("role").get<std::string>());
    r.target = j.at("target").get<std::string>();
    r.policy = parse_policy(j.at("policy").get<std::string>());
    r.iterations = j.at("iterations").get<std::uint64_t>();
    r.passed = j.at("passed").get<std::uint64_t>();
    r.success_ratio = j.at("success_ratio").get<double>();
    r.degenerate = j.at("degenerate").get<bool>();
    r.histogram = j.at("histogram").get<std::map<std::string, std::uint64_t>>();
    r.advisory_histogram = j.at("advisory_histogram").get<std::map<std::string, std::uint64_t>>();
    r.generated_at = j.value("generated_at", "");
    for (const auto& jr : j.at("runs")) {
      IterationResult run;
      run.index = jr.at("index").get<std::uint64_t>();
      run.seed = jr.at("seed").get<std::uint64_t>();
      run.passed = jr.at("outcome").get<std::string>() == "pass";
      run.end_reason = parse_end_reason(jr.at("end_reason").get<std::string>());
      run.end_ms = jr.at("end_ms").get<std::uint64_t>();
      run.verdicts = verdicts_from_json(jr.at("verdicts"));
      run.stimuli = verdicts_from_json(jr.at("stimuli"));
      run.advisories = verdicts_from_json(jr.at("advisories"));
      r.runs.push_back(std::move(run));
    }
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

void emit_report(const Report& r, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report to " + path);
  out << (format == ReportFormat::kText ? render_text(r) : render_json(r));
  if (!out.flush()) throw IoError("cannot write report to " + path);
}

Report load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report_json(buf.str());
}

}  // namespace quicheck
