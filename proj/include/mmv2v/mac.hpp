#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "mmv2v/event_queue.hpp"
#include "mmv2v/geometry.hpp"
#include "mmv2v/params.hpp"
#include "mmv2v/radio.hpp"
#include "mmv2v/rng.hpp"
#include "mmv2v/trace.hpp"

namespace mmv2v {

/// Over-the-air frame. Fields not used by a kind keep their defaults.
struct Frame {
  FrameKind kind = FrameKind::data;
  StationId tx = 0;
  StationId rx = kBroadcast;
  int sector_id = 0;
  int cdown = -1;            // beacon and SSW sweeps only
  int echoed_sector = -1;    // SSW: best PCP sector seen by the responder
  int feedback_sector = -1;  // SSW-FBCK: best responder sector seen by the PCP
  int n_abft_slots = 0;      // beacon only
  int bi = 0;                // BI number of the PBSS the frame belongs to
  int slot = -1;             // SSW and SSW-FBCK
  int sp_index = -1;         // REQ, ACK, data
  SimTime bi_start;          // beacon: start of the PCP's current BI
  SimTime sp_start;          // REQ grant
  SimTime sp_duration;       // REQ grant
  std::size_t payload_bytes = 0;
};

/// Argmax record for one peer link.
struct BeamRecord {
  int best_tx_sector = -1;    // my sector toward the peer
  int best_peer_sector = -1;  // the peer's sector toward me
  double best_rx_power = -std::numeric_limits<double>::infinity();

  /// Keeps the strongest observation; equal powers prefer the lower sector.
  bool observe(int peer_sector, double p_rx_dbm);
};

struct Reservation {
  SimTime start;
  SimTime end;
  StationId owner;  // PCP whose PBSS the commitment belongs to
  AntennaMode mode;
};

/// One snapshot of the multi-PBSS network: every station's MAC plus the
/// shared channel, driven by one event queue.
class SnapshotSimulator {
 public:
  SnapshotSimulator(Scenario scenario, SimParams params, std::uint64_t seed);

  /// Runs to the end of the snapshot.
  const Trace& run();
  void run_until(SimTime t);

  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }
  const Scenario& scenario() const { return scenario_; }
  const SimParams& params() const { return params_; }
  SimTime now() const { return queue_.now(); }

  /// The station's antenna as of the current clock (PCPs redraw it per BI).
  const AntennaConfig& antenna(StationId id) const { return stations_.at(id).antenna; }
  /// PCP-side record for `responder`, valid for the PCP's latest BI.
  const BeamRecord& pcp_beam(StationId pcp, StationId responder) const;
  /// Responder-side record toward `pcp`, valid for that PCP's latest BI.
  const BeamRecord& responder_beam(StationId responder, StationId pcp) const;
  bool handshake_complete(StationId responder, StationId pcp) const;
  const std::vector<SimTime>& bi_starts(StationId pcp) const { return stations_.at(pcp).bi_starts; }

  double path_loss(StationId a, StationId b) const { return pl_[idx(a, b)]; }
  double pair_bearing(StationId from, StationId to) const { return bearing_[idx(from, to)]; }
  int blockers(StationId a, StationId b) const { return blockers_[idx(a, b)]; }

 private:
  struct ResponderLink {
    int bi = -1;
    SimTime bi_start;
    BeamRecord beam;
    bool abft_scheduled = false;
    bool handshake_complete = false;
  };
  struct PcpLink {
    int bi = -1;
    BeamRecord beam;
  };
  struct PcpContext {
    int bi = -1;
    SimTime bi_start;
    std::vector<std::vector<StationId>> slot_decoded;
    std::vector<StationId> candidates;
    std::vector<StationId> req_targets;  // REQ_k -> SP_k
    std::vector<bool> allocated;
  };
  struct Station {
    StationId id = 0;
    bool pcp = false;
    AntennaConfig antenna;
    Rng rng;
    std::vector<Reservation> reservations;
    std::vector<ResponderLink> as_responder;
    std::vector<PcpLink> as_pcp;
    PcpContext ctx;
    std::vector<SimTime> bi_starts;
  };
  struct AirFrame {
    std::uint64_t id;
    Frame frame;
    SimTime start;
    SimTime end;
    AntennaMode tx_mode;
    double tx_boresight;
    const McsEntry* mcs;
  };
  struct DataSession {
    StationId pcp;
    StationId rx;
    int bi;
    int sp_index;
    int sector;
    SimTime sp_end;
    int remaining;
  };

  std::size_t idx(StationId a, StationId b) const { return static_cast<std::size_t>(a) * n_ + b; }

  // medium
  void transmit(const Frame& frame, AntennaMode mode);
  void on_frame_end(std::uint64_t id);
  RxStatus receive(const AirFrame& f, StationId r, double& p_signal);
  double power_at(const AirFrame& f, StationId r, AntennaMode rx_mode) const;
  SimTime airtime(FrameKind kind) const;
  const McsEntry& mcs_for(FrameKind kind) const;

  // commitments
  AntennaMode mode_at(const Station& s, SimTime t) const;
  bool conflicts(const Station& s, SimTime start, SimTime end, StationId owner) const;
  bool reserve(Station& s, SimTime start, SimTime end, StationId owner, AntennaMode mode);

  // protocol
  void start_bi(StationId pcp, int bi);
  void on_dmg_beacon(StationId r, const Frame& f, double p_rx);
  void abft_respond(StationId r, StationId pcp, int bi);
  void on_ssw(StationId pcp, const Frame& f, double p_rx);
  void send_ssw_fbck(StationId pcp, int bi, int slot);
  void on_ssw_fbck(StationId r, const Frame& f);
  void ati_run(StationId pcp, int bi);
  void on_ati_req(StationId r, const Frame& f);
  void on_ati_ack(StationId pcp, const Frame& f);
  void data_attempt(std::size_t session);
  bool channel_busy(StationId s, int sector) const;

  void record(TraceRecord r) { trace_.records.push_back(r); }

  Scenario scenario_;
  SimParams params_;
  std::size_t n_ = 0;
  EventQueue queue_;
  Trace trace_;
  std::vector<Station> stations_;
  std::vector<double> pl_;
  std::vector<double> bearing_;
  std::vector<int> blockers_;
  double noise_dbm_ = 0.0;
  double p_tx_dbm_ = 0.0;

  std::deque<AirFrame> air_;
  std::uint64_t next_frame_id_ = 0;
  std::uint64_t first_air_id_ = 0;
  SimTime air_retention_;
  std::vector<double> interferer_mw_;  // scratch, per transmitter

  SimTime beacon_air_, ssw_air_, fbck_air_, req_air_, ack_air_, data_air_;
  SimTime ssw_sweep_len_, fbck_tail_, exchange_len_;
  std::vector<DataSession> sessions_;
};

}  // namespace mmv2v
