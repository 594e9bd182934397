#include "mmv2v/params.hpp"

#include <cmath>
#include <string>

namespace mmv2v {

void BiConfig::validate() const {
  if (bti_tu < 1 || abft_slot_tu < 1 || ati_tu < 1) throw ConfigError("access period lengths must be >= 1 TU");
  if (n_abft_slots < 1) throw ConfigError("n_abft_slots must be >= 1");
  if (n_sp < 0) throw ConfigError("n_sp must be >= 0");
  if (sp_duration <= SimTime{}) throw ConfigError("sp_duration must be positive");
  if (tu <= SimTime{}) throw ConfigError("tu must be positive");
}

double RadioConfig::resolved_peak_gain_dbi() const {
  return std::isnan(peak_gain_dbi) ? conserving_peak_gain_dbi(n_sectors, sidelobe_gain_dbi) : peak_gain_dbi;
}

AntennaConfig RadioConfig::antenna(double boresight) const {
  return AntennaConfig{n_sectors, boresight, resolved_peak_gain_dbi(), sidelobe_gain_dbi, quasi_omni_gain_dbi};
}

void RadioConfig::validate() const {
  if (n_sectors < 2) throw ConfigError("n_sectors must be >= 2");
  if (!(bandwidth_hz > 0)) throw ConfigError("bandwidth_hz must be positive");
  if (!(resolved_peak_gain_dbi() > sidelobe_gain_dbi)) throw ConfigError("peak gain must exceed sidelobe gain");
}

void SimParams::validate() const {
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  radio.validate();
  mac.bi.validate();
  if (!radio.mcs.contains(mac.control_mcs) || !radio.mcs.contains(mac.data_mcs)) {
    throw ConfigError("control/data MCS missing from the MCS table");
  }
  if (mac.packets_per_sp < 0) throw ConfigError("packets_per_sp must be >= 0");
  if (!(mac.fbck_tail_fraction > 0 && mac.fbck_tail_fraction < 1)) {
    throw ConfigError("fbck_tail_fraction must lie in (0, 1)");
  }
  if (snapshot_duration <= SimTime{}) throw ConfigError("snapshot_duration must be positive");

  const auto& ctrl = radio.mcs.at(mac.control_mcs);
  const auto& data = radio.mcs.at(mac.data_mcs);
  const auto& pre = radio.preambles;
  const std::int64_t n = radio.n_sectors;

  const SimTime sweep = frame_airtime(mac.beacon_bytes, ctrl, pre) * n + mac.sbifs * (n - 1);
  if (sweep > mac.bi.bti()) {
    throw ConfigError("BTI overflow: beacon sweep needs " + std::to_string(sweep.us()) + " us");
  }
  const SimTime slot = mac.bi.abft_slot();
  const auto tail = SimTime::from_ns(std::llround(mac.fbck_tail_fraction * static_cast<double>(slot.ns())));
  const SimTime ssw_sweep = frame_airtime(mac.ssw_bytes, ctrl, pre) * n + mac.sbifs * (n - 1);
  if (ssw_sweep > slot - tail) {
    throw ConfigError("A-BFT slot overflow: SSW sweep needs " + std::to_string(ssw_sweep.us()) + " us");
  }
  if (frame_airtime(mac.ssw_fbck_bytes, ctrl, pre) > tail) throw ConfigError("A-BFT slot overflow: feedback tail");
  const SimTime exchange =
      frame_airtime(mac.req_bytes, data, pre) + frame_airtime(mac.ack_bytes, data, pre) + mac.sifs * 2;
  if (exchange * mac.bi.n_sp > mac.bi.ati()) throw ConfigError("ATI overflow: too many REQ/ACK exchanges");
  if (frame_airtime(mac.data_bytes, data, pre) > mac.bi.sp_duration) throw ConfigError("data frame longer than SP");
}

}  // namespace mmv2v
