#pragma once

#include <limits>
#include <stdexcept>

#include "mmv2v/geometry.hpp"
#include "mmv2v/radio.hpp"
#include "mmv2v/sim_time.hpp"

namespace mmv2v {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Beacon interval layout: BTI | A-BFT (n slots) | ATI | n_sp service periods.
struct BiConfig {
  int bti_tu = 5;
  int abft_slot_tu = 5;
  int n_abft_slots = 4;
  int ati_tu = 5;
  int n_sp = 4;
  SimTime sp_duration = SimTime::from_ms(50);
  SimTime tu = kTimeUnit;

  int abft_tu() const { return abft_slot_tu * n_abft_slots; }
  SimTime bti() const { return tu * bti_tu; }
  SimTime abft_slot() const { return tu * abft_slot_tu; }
  SimTime abft() const { return tu * abft_tu(); }
  SimTime ati() const { return tu * ati_tu; }
  SimTime bhi() const { return tu * (bti_tu + abft_tu() + ati_tu); }
  SimTime bi() const { return bhi() + sp_duration * n_sp; }

  SimTime abft_start(SimTime bi_start) const { return bi_start + bti(); }
  SimTime slot_start(SimTime bi_start, int slot) const { return abft_start(bi_start) + abft_slot() * slot; }
  SimTime ati_start(SimTime bi_start) const { return bi_start + bti() + abft(); }
  /// `k` is zero-based.
  SimTime sp_start(SimTime bi_start, int k) const { return bi_start + bhi() + sp_duration * k; }

  void validate() const;
};

struct RadioConfig {
  double p_tx_dbm = 10.0;
  int n_sectors = 14;
  double sidelobe_gain_dbi = -10.0;
  double quasi_omni_gain_dbi = 11.0;  // calibrated, see README
  /// NaN selects the power-conserving value for the sector count and sidelobe floor.
  double peak_gain_dbi = std::numeric_limits<double>::quiet_NaN();
  double bandwidth_hz = 2.16e9;
  double noise_figure_db = 10.0;
  McsTable mcs = McsTable::defaults();
  PreambleDurations preambles;

  double resolved_peak_gain_dbi() const;
  double noise_dbm() const { return noise_floor_dbm(bandwidth_hz, noise_figure_db); }
  AntennaConfig antenna(double boresight = 0.0) const;
  void validate() const;
};

struct MacConfig {
  BiConfig bi;
  int control_mcs = 0;
  int data_mcs = 13;
  SimTime sbifs = SimTime::from_us(1);
  SimTime sifs = SimTime::from_us(3);
  std::size_t beacon_bytes = 40;
  std::size_t ssw_bytes = 26;
  std::size_t ssw_fbck_bytes = 28;
  std::size_t req_bytes = 28;
  std::size_t ack_bytes = 28;
  std::size_t data_bytes = 1600;
  int packets_per_sp = 600;
  double fbck_tail_fraction = 0.2;
  double lbt_threshold_dbm = -48.0;
  SimTime lbt_backoff = SimTime::from_us(5);
  SimTime max_start_jitter = kTimeUnit;
};

struct SimParams {
  ScenarioConfig scenario;
  RadioConfig radio;
  MacConfig mac;
  SimTime snapshot_duration = SimTime::from_s(2);

  /// Checks every config plus the airtime fits (BTI sweep, A-BFT slot, ATI).
  /// Throws ConfigError.
  void validate() const;
};

}  // namespace mmv2v
