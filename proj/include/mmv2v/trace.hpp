#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmv2v/geometry.hpp"
#include "mmv2v/sim_time.hpp"

namespace mmv2v {

inline constexpr StationId kBroadcast = -1;

enum class FrameKind : std::uint8_t { dmg_beacon, ssw, ssw_fbck, ati_req, ati_ack, data };

enum class TraceEvent : std::uint8_t {
  bi_start,           // station = PCP; start/end = BI window
  traffic_generated,  // station = PCP; index = packets per SP
  tx,                 // station = transmitter, peer = addressee; index = tx sector
  rx,                 // station = receiver, peer = transmitter; index = tx sector
  tx_dropped,         // a frame not sent because of a conflicting commitment
  sp_allocated,       // station = PCP, peer = responder; index = SP number; start/end = SP window
};

enum class RxStatus : std::uint8_t { ok, fail_sensitivity, fail_sinr, fail_half_duplex };

const char* to_string(FrameKind kind);
const char* to_string(TraceEvent event);
const char* to_string(RxStatus status);

struct TraceRecord {
  SimTime time;
  TraceEvent event = TraceEvent::tx;
  FrameKind kind = FrameKind::data;
  RxStatus status = RxStatus::ok;
  StationId station = 0;
  StationId peer = kBroadcast;
  int bi = 0;
  int index = 0;
  SimTime start;
  SimTime end;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  int n_stations = 0;
  SimTime duration;
  std::vector<TraceRecord> records;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented text: a header line, then one record per line as
/// "time_ns event kind station peer bi index status start_ns end_ns".
void write_trace(std::ostream& os, const Trace& trace);
Trace read_trace(std::istream& is);

}  // namespace mmv2v
