#include "quicheck/harness/trace.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "quicheck/errors.hpp"

namespace quicheck {

namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::uint64_t number(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw InputError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<TraceIteration>& iterations,
                 std::string_view comment) {
  out << "# quicheck trace\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& it : iterations) {
    out << "iteration " << it.index << ' ' << it.seed << '\n';
    for (const auto& r : it.records) {
      out << (r.direction == Direction::kFromTester ? "tester" : "peer") << ' ' << r.timestamp_ms
          << ' ' << r.datagram.src.to_string() << ' ' << r.datagram.dst.to_string() << ' '
          << to_hex(r.datagram.bytes) << '\n';
    }
    out << "end " << it.end_ms << '\n';
  }
}

std::string format_trace(const std::vector<TraceIteration>& iterations, std::string_view comment) {
  std::ostringstream os;
  write_trace(os, iterations, comment);
  return os.str();
}

std::vector<TraceIteration> parse_trace(std::string_view text) {
  std::vector<TraceIteration> out;
  bool open = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = fields(line);
    if (f.empty() || f[0].starts_with('#')) continue;
    try {
      if (f[0] == "iteration") {
        if (open) throw InputError("iteration without a preceding end");
        if (f.size() != 3) throw InputError("expected: iteration <index> <seed>");
        out.push_back(TraceIteration{number(f[1], "index"), number(f[2], "seed"), {}, 0});
        open = true;
      } else if (f[0] == "end") {
        if (!open) throw InputError("end outside an iteration");
        if (f.size() != 2) throw InputError("expected: end <timestamp>");
        out.back().end_ms = number(f[1], "timestamp");
        open = false;
      } else if (f[0] == "tester" || f[0] == "peer") {
        if (!open) throw InputError("record outside an iteration");
        if (f.size() != 5) throw InputError("expected: <tester|peer> <timestamp> <src> <dst> <hex>");
        TraceRecord r;
        r.direction = f[0] == "tester" ? Direction::kFromTester : Direction::kFromPeer;
        r.timestamp_ms = number(f[1], "timestamp");
        r.datagram = Datagram{Address::parse(f[2]), Address::parse(f[3]), from_hex(f[4])};
        out.back().records.push_back(std::move(r));
      } else {
        throw InputError("unknown record '" + std::string(f[0]) + "'");
      }
    } catch (const InputError& e) {
      throw InputError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (open) throw InputError("trace ends inside iteration " + std::to_string(out.back().index));
  return out;
}

std::vector<TraceIteration> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read trace " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

void save_trace(const std::string& path, const std::vector<TraceIteration>& iterations,
                std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace " + path);
  write_trace(out, iterations, comment);
  if (!out.flush()) throw IoError("cannot write trace " + path);
}

}  // namespace quicheck
