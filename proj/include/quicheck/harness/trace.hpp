#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quicheck/engine/state.hpp"
#include "quicheck/harness/datagram.hpp"

namespace quicheck {

// One datagram as the monitor saw it.
struct TraceRecord {
  Direction direction = Direction::kFromTester;
  std::uint64_t timestamp_ms = 0;
  Datagram datagram;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceIteration {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::uint64_t end_ms = 0;
  friend bool operator==(const TraceIteration&, const TraceIteration&) = default;
};

// Line format, one record per line, '#' starts a comment:
//   iteration <index> <seed>
//   tester|peer <timestamp ms> <src a.b.c.d:port> <dst a.b.c.d:port> <hex bytes>
//   end <timestamp ms>
void write_trace(std::ostream& out, const std::vector<TraceIteration>& iterations,
                 std::string_view comment = {});
std::string format_trace(const std::vector<TraceIteration>& iterations,
                         std::string_view comment = {});
// Throws InputError naming the offending line.
std::vector<TraceIteration> parse_trace(std::string_view text);
std::vector<TraceIteration> load_trace(const std::string& path);
void save_trace(const std::string& path, const std::vector<TraceIteration>& iterations,
                std::string_view comment = {});

}  // namespace quicheck
