#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mmv2v/sim_time.hpp"

namespace mmv2v {

// ---------------------------------------------------------------------------
// Path loss

/// Empirical 60 GHz inter-vehicle model: PL = A*10*log10(d) + C + 15*d/1000.
struct PathLossParams {
  double a;
  double c;
};

inline constexpr int kMaxBlockerClass = 3;

/// Indexed by blocker class: LOS, 1, 2, 3 vehicles.
inline constexpr std::array<PathLossParams, kMaxBlockerClass + 1> kPathLossTable{{
    {1.77, 70.0},
    {1.71, 78.6},
    {0.635, 115.0},
    {0.362, 126.0},
}};

/// Counts above three use the three-vehicle class. Throws for d <= 0.
double path_loss_db(double distance_m, int n_blockers);

// ---------------------------------------------------------------------------
// PHY modes and MCS table

enum class PhyMode { control, single_carrier, ofdm };

const char* to_string(PhyMode mode);

struct McsEntry {
  int id = 0;
  PhyMode phy_mode = PhyMode::control;
  std::uint64_t data_rate_bps = 0;
  double sensitivity_dbm = 0.0;
  double min_sinr_db = 0.0;
};

class McsTable {
 public:
  /// Control PHY (MCS 0), SC (1-12) and OFDM (13-24) rates with standard
  /// receiver sensitivities.
  static McsTable defaults();

  /// CSV: id,phy_mode,rate_mbps,sensitivity_dbm,min_sinr_db
  /// with '#' comments allowed. Throws std::invalid_argument.
  static McsTable parse(std::istream& is);
  static McsTable load(const std::string& path);

  const McsEntry& at(int id) const;
  McsEntry& at(int id);
  bool contains(int id) const;
  const std::vector<McsEntry>& entries() const { return entries_; }

 private:
  std::vector<McsEntry> entries_;
};

// ---------------------------------------------------------------------------
// Sectored antenna

struct AntennaConfig {
  int n_sectors = 14;
  double boresight = 0.0;  // center angle of sector 0, rad
  double peak_gain_dbi = 0.0;
  double sidelobe_gain_dbi = -10.0;
  double quasi_omni_gain_dbi = 0.0;

  double sector_width() const;
  /// Sectors advance clockwise (decreasing angle) with increasing id.
  double sector_center(int sector) const;
};

/// Peak gain that makes the mean linear gain of one directional sector
/// pattern over the full circle equal to one.
double conserving_peak_gain_dbi(int n_sectors, double sidelobe_gain_dbi);

/// Gain drop at the sector edge, dB.
inline constexpr double kSectorEdgeRolloffDb = 3.01;

struct AntennaMode {
  bool quasi_omni = true;
  int sector = 0;

  static constexpr AntennaMode omni() { return {true, 0}; }
  static constexpr AntennaMode directional(int sector) { return {false, sector}; }
  friend bool operator==(const AntennaMode&, const AntennaMode&) = default;
};

double antenna_gain_db(const AntennaConfig& cfg, AntennaMode mode, double bearing_to_peer);

/// Sector whose center is angularly closest to the bearing (lowest id on ties).
int closest_sector(const AntennaConfig& cfg, double bearing_to_peer);

// ---------------------------------------------------------------------------
// Link budget and reception

double rx_power_dbm(double tx_gain_db, double rx_gain_db, double p_tx_dbm, double path_loss_db);

struct LinkBudget {
  double p_tx_dbm;
  double g_tx_db;
  double g_rx_db;
  double pl_db;
  double p_rx_dbm;

  static LinkBudget evaluate(double p_tx_dbm, double g_tx_db, double g_rx_db, double pl_db) {
    return {p_tx_dbm, g_tx_db, g_rx_db, pl_db, rx_power_dbm(g_tx_db, g_rx_db, p_tx_dbm, pl_db)};
  }
};

/// Thermal noise -174 dBm/Hz plus noise figure.
double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

enum class DecodeOutcome { ok, fail_sensitivity, fail_sinr };

const char* to_string(DecodeOutcome outcome);

double sinr_db(double p_signal_dbm, std::span<const double> interferers_dbm, double noise_dbm);

DecodeOutcome decode_outcome(double p_signal_dbm, std::span<const double> interferers_dbm, const McsEntry& mcs,
                             double noise_dbm);

// ---------------------------------------------------------------------------
// Airtime

struct PreambleDurations {
  SimTime control = SimTime::from_ns(9'100);
  SimTime single_carrier = SimTime::from_ns(1'891);
  SimTime ofdm = SimTime::from_ns(4'200);

  SimTime for_mode(PhyMode mode) const;
};

/// Preamble plus payload bits at the MCS rate, rounded up to whole ns.
SimTime frame_airtime(std::size_t payload_bytes, const McsEntry& mcs, const PreambleDurations& preambles = {});

}  // namespace mmv2v
