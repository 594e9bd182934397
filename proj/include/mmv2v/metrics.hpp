#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "mmv2v/geometry.hpp"
#include "mmv2v/params.hpp"
#include "mmv2v/trace.hpp"

namespace mmv2v {

/// Handshake completions observed in one BI of one PCP.
struct HandshakeCounts {
  int beacon_responders = 0;  // distinct stations decoding >= 1 DMG beacon
  int fbck_responders = 0;    // distinct stations decoding >= 1 SSW-FBCK
  int acks = 0;               // ACKs decoded by the PCP
  int reqs = 0;               // REQ frames sent
};

struct PcpMetrics {
  StationId pcp = 0;
  std::vector<HandshakeCounts> per_bi;
  HandshakeCounts first_bi;
  std::optional<double> delay_first_sp_ms;  // none if no SP was ever allocated
  int n_bis = 0;
  // SPs ending inside the snapshot; a truncated final SP only counts toward the delay
  int potential_sps = 0;
  int allocated_sps = 0;
  long delivered = 0;
  double normalized_pdr = 0.0;
  std::optional<double> allocated_sp_pdr;  // none without allocated SPs
};

struct SnapshotMetrics {
  std::vector<PcpMetrics> pcps;
  /// concurrency[k] = fraction of the snapshot with exactly k data frames on air.
  std::vector<double> concurrency;

  /// Fraction of time with at most one data transmission.
  double no_concurrency() const;
  /// Exactly k for k < 4, at least 4 for k == 4.
  double concurrency_bucket(int k) const;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SummaryConfig {
  int n_sp = 4;
  int packets_per_sp = 600;
  SimTime bhi;
  SimTime sp_duration;

  static SummaryConfig from(const SimParams& p) {
    return {p.mac.bi.n_sp, p.mac.packets_per_sp, p.mac.bi.bhi(), p.mac.bi.sp_duration};
  }
};

/// Throws MetricsError for traces that are out of order or reference unknown stations.
SnapshotMetrics summarize_snapshot(const Trace& trace, const SummaryConfig& cfg);

/// Reachable neighbors of each PCP with peak gain at both ends, the
/// blockage-classed path loss and no interference (decode at the control MCS).
std::vector<int> ideal_neighbor_counts(const Scenario& scenario, const RadioConfig& radio, int control_mcs = 0);
/// Mean over the scenario's PCPs (0 for a single vehicle).
double ideal_neighbor_benchmark(const Scenario& scenario, const RadioConfig& radio, int control_mcs = 0);

struct MeanCi {
  double mean = 0.0;
  double ci = 0.0;  // 95% normal-approximation half width
  std::size_t n = 0;

  static MeanCi of(const std::vector<double>& samples);
};

struct CampaignRow {
  double pcp_probability = 0.0;
  int n_abft_slots = 0;
  std::size_t n_snapshots = 0;
  MeanCi beacons;
  MeanCi fbck;
  MeanCi acks;
  MeanCi delay_ms;
  MeanCi npdr;
  MeanCi alloc_pdr;
  double conc0 = 0.0;
  double conc2 = 0.0;
  double conc3 = 0.0;
  double conc4 = 0.0;
};

struct CellSnapshot {
  double pcp_probability;
  int n_abft_slots;
  SnapshotMetrics metrics;
};

/// Groups by (pcp_probability, n_abft_slots), sorted ascending. Handshake,
/// delay and PDR statistics pool PCP samples; concurrency averages snapshots.
std::vector<CampaignRow> aggregate(const std::vector<CellSnapshot>& snapshots);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const CampaignRow& row);
void write_csv(std::ostream& os, const std::vector<CampaignRow>& rows);

}  // namespace mmv2v
