#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "quicheck/catalog/catalog.hpp"
#include "quicheck/errors.hpp"
#include "quicheck/harness/runner.hpp"

namespace {

using namespace quicheck;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

Address parse_target(std::string text) {
  if (text.starts_with("localhost:")) text = "127.0.0.1" + text.substr(9);
  return Address::parse(text);
}

int finish(const Report& report, const std::string& path, const std::string& format) {
  std::cout << render_text(report);
  if (!path.empty()) emit_report(report, parse_report_format(format), path);
  return report.passed == report.iterations && !report.degenerate ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based conformance tester for QUIC draft-29 endpoints"};
  app.require_subcommand(1, 1);

  std::string test;
  std::string role = "server";
  std::string target;
  std::string sim = "conformant";
  std::uint64_t iterations = 100;
  std::uint64_t seed = 0;
  std::string policy = "app-level";
  std::uint64_t timeout_ms = kDefaultSilenceMs;
  std::string report_path;
  std::string format = "text";
  std::size_t workers = 1;
  std::string trace_path;
  bool count_advisories = false;

  auto* run = app.add_subcommand("run", "run a catalog test for a number of iterations");
  run->add_option("--test", test, "test name")->required();
  run->add_option("--role", role, "role of the implementation under test (client|server)");
  auto* target_opt = run->add_option("--target", target, "UDP target host:port");
  auto* sim_opt = run->add_option("--sim", sim, "conformant | defect:<name>[=code]");
  target_opt->excludes(sim_opt);
  run->add_option("--iterations", iterations, "iterations (default 100)");
  run->add_option("--seed", seed, "base seed; iteration i uses seed ^ i");
  run->add_option("--policy", policy, "all-levels | app-level (default)");
  run->add_option("--timeout-ms", timeout_ms, "silence window after the stimulus, ms");
  run->add_option("--report", report_path, "write the report to this file");
  run->add_option("--format", format, "text | structured");
  run->add_option("--workers", workers, "parallel iterations (simulated peer only)");
  run->add_option("--trace", trace_path, "record every datagram to this trace file");
  run->add_flag("--count-advisories", count_advisories, "advisory findings fail the iteration");

  std::string list_role;
  auto* list = app.add_subcommand("list", "list catalog test names");
  list->add_option("--role", list_role, "client | server")->required();

  std::string trace_file;
  auto* replay = app.add_subcommand("replay", "judge a recorded trace offline");
  replay->add_option("trace", trace_file, "trace file")->required();
  replay->add_option("--test", test, "test the trace belongs to")->required();
  replay->add_option("--role", role, "role of the implementation under test");
  replay->add_option("--policy", policy, "all-levels | app-level (default)");
  replay->add_option("--timeout-ms", timeout_ms, "silence window after the stimulus, ms");
  replay->add_option("--report", report_path, "write the report to this file");
  replay->add_option("--format", format, "text | structured");
  replay->add_flag("--count-advisories", count_advisories, "advisory findings fail the iteration");

  auto* validate = app.add_subcommand("validate", "check the catalog against the requirement registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (list->parsed()) {
      for (const auto& name : list_tests(list_role)) std::cout << name << '\n';
      return kExitPass;
    }
    if (validate->parsed()) {
      const auto defects = validate_catalog();
      for (const auto& d : defects) std::cerr << d << '\n';
      if (!defects.empty()) return kExitUsage;
      std::cout << "catalog ok: " << list_tests(Role::kServer).size() << " server tests, "
                << list_tests(Role::kClient).size() << " client tests\n";
      return kExitPass;
    }
    parse_report_format(format);
    if (replay->parsed()) {
      const auto& spec = get_test(test, parse_role(role));
      const auto report = replay_trace(load_trace(trace_file), spec, parse_policy(policy), timeout_ms,
                                       count_advisories);
      return finish(report, report_path, format);
    }
    RunConfig cfg;
    cfg.test = test;
    cfg.role_under_test = parse_role(role);
    if (!target.empty()) cfg.udp_target = parse_target(target);
    cfg.sim = SimPeerConfig::parse(sim);
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.policy = parse_policy(policy);
    cfg.silence_ms = timeout_ms;
    cfg.workers = workers;
    cfg.trace_path = trace_path;
    cfg.count_advisories = count_advisories;
    get_test(cfg.test, cfg.role_under_test);
    cfg.validate();
    return finish(run_test(cfg), report_path, format);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
