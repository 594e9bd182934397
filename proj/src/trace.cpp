#include "mmv2v/trace.hpp"

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace mmv2v {

namespace {

constexpr std::array kFrameNames = {"beacon", "ssw", "ssw_fbck", "req", "ack", "data"};
constexpr std::array kEventNames = {"bi_start", "traffic", "tx", "rx", "tx_dropped", "sp_alloc"};
constexpr std::array kStatusNames = {"ok", "fail_sensitivity", "fail_sinr", "fail_half_duplex"};

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<const char*, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (s == names[i]) return static_cast<E>(i);
  }
  throw TraceFormatError(std::string("unknown ") + what + " '" + s + "'");
}

constexpr std::string_view kHeader = "# mmv2v-trace v1";

}  // namespace

const char* to_string(FrameKind kind) { return kFrameNames.at(static_cast<std::size_t>(kind)); }
const char* to_string(TraceEvent event) { return kEventNames.at(static_cast<std::size_t>(event)); }
const char* to_string(RxStatus status) { return kStatusNames.at(static_cast<std::size_t>(status)); }

void write_trace(std::ostream& os, const Trace& trace) {
  os << kHeader << " n_stations=" << trace.n_stations << " duration_ns=" << trace.duration.ns() << '\n';
  for (const auto& r : trace.records) {
    os << r.time.ns() << ' ' << to_string(r.event) << ' ' << to_string(r.kind) << ' ' << r.station << ' ' << r.peer
       << ' ' << r.bi << ' ' << r.index << ' ' << to_string(r.status) << ' ' << r.start.ns() << ' ' << r.end.ns()
       << '\n';
  }
}

Trace read_trace(std::istream& is) {
  Trace t;
  std::string line;
  if (!std::getline(is, line) || line.rfind(kHeader, 0) != 0) throw TraceFormatError("missing trace header");
  {
    long long dur = 0;
    if (std::sscanf(line.c_str() + kHeader.size(), " n_stations=%d duration_ns=%lld", &t.n_stations, &dur) != 2) {
      throw TraceFormatError("malformed trace header");
    }
    t.duration = SimTime::from_ns(dur);
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long time = 0, start = 0, end = 0;
    std::string ev, kind, status;
    TraceRecord r;
    if (!(ls >> time >> ev >> kind >> r.station >> r.peer >> r.bi >> r.index >> status >> start >> end)) {
      throw TraceFormatError("malformed trace line " + std::to_string(line_no));
    }
    r.time = SimTime::from_ns(time);
    r.event = parse_enum<TraceEvent>(ev, kEventNames, "event");
    r.kind = parse_enum<FrameKind>(kind, kFrameNames, "frame kind");
    r.status = parse_enum<RxStatus>(status, kStatusNames, "rx status");
    r.start = SimTime::from_ns(start);
    r.end = SimTime::from_ns(end);
    t.records.push_back(r);
  }
  return t;
}

}  // namespace mmv2v
