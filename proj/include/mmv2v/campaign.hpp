#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmv2v/metrics.hpp"
#include "mmv2v/params.hpp"
#include "mmv2v/trace.hpp"

namespace mmv2v {

struct CampaignSpec {
  SimParams base;  // scenario template plus radio/MAC constants
  std::vector<int> bi_slot_sweep{3, 4, 5, 6, 7, 8};
  std::vector<double> pcp_prob_sweep{0.10, 0.20, 0.30, 0.40};
  int snapshots_per_cell = 200;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::string csv_path;
  std::string trace_path;

  /// Throws ConfigError for sweep values outside the supported sets.
  void validate() const;
};

struct Cell {
  std::size_t index = 0;  // row-major over (pcp_prob_sweep, bi_slot_sweep)
  double pcp_probability = 0.1;
  int n_abft_slots = 4;
};

std::vector<Cell> campaign_cells(const CampaignSpec& spec);

/// Parameters of one cell: the template with the PCP probability applied and
/// n_sp paired to the slot count.
SimParams cell_params(const CampaignSpec& spec, const Cell& cell);

/// base_seed + cell_index * 1e6 + snapshot_index.
std::uint64_t snapshot_seed(std::uint64_t base_seed, std::size_t cell_index, std::size_t snapshot_index);

struct SnapshotResult {
  SnapshotMetrics metrics;
  Scenario scenario;
  std::optional<Trace> trace;
};

/// Deploy, simulate the full snapshot and summarize. Deployment failures are
/// rethrown as DeploymentError naming the cell.
SnapshotResult run_snapshot(const CampaignSpec& spec, const Cell& cell, std::size_t snapshot_index,
                            bool keep_trace = false);

struct CampaignResult {
  std::vector<CampaignRow> rows;
  std::vector<CellSnapshot> snapshots;  // ordered by (cell, snapshot_index)
};

CampaignResult run_campaign(const CampaignSpec& spec);
/// Runs the campaign and writes the CSV to spec.csv_path (when set) and `os`.
void run_campaign_csv(const CampaignSpec& spec, std::ostream& os);

struct BenchmarkRow {
  double pcp_probability = 0.0;
  MeanCi neighbors;  // pooled over PCPs of all deployments
};

/// Ideal-MAC reachable neighbors over snapshots_per_cell deployments per probability.
std::vector<BenchmarkRow> run_benchmark(const CampaignSpec& spec);
/// All probabilities pooled.
MeanCi pooled_benchmark(const CampaignSpec& spec);

/// Flat `key = value` configuration; `#` starts a comment. Unknown keys throw ConfigError.
void apply_config(CampaignSpec& spec, std::istream& is, const std::string& origin = "<config>");
void apply_config_file(CampaignSpec& spec, const std::string& path);
void apply_config_entry(CampaignSpec& spec, const std::string& key, const std::string& value);
/// Every recognised key, for help output and tests.
const std::vector<std::string>& config_keys();

}  // namespace mmv2v
