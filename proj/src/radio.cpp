#include "mmv2v/radio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mmv2v/geometry.hpp"

namespace mmv2v {

double path_loss_db(double distance_m, int n_blockers) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss_db: distance must be positive");
  const auto& p = kPathLossTable[std::clamp(n_blockers, 0, kMaxBlockerClass)];
  return p.a * 10.0 * std::log10(distance_m) + p.c + 15.0 * distance_m / 1000.0;
}

const char* to_string(PhyMode mode) {
  switch (mode) {
    case PhyMode::control: return "control";
    case PhyMode::single_carrier: return "sc";
    case PhyMode::ofdm: return "ofdm";
  }
  return "?";
}

namespace {

PhyMode parse_phy_mode(const std::string& s) {
  if (s == "control") return PhyMode::control;
  if (s == "sc") return PhyMode::single_carrier;
  if (s == "ofdm") return PhyMode::ofdm;
  throw std::invalid_argument("unknown phy_mode '" + s + "'");
}

std::uint64_t mbps_to_bps(double mbps) { return static_cast<std::uint64_t>(std::llround(mbps * 1e6)); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

namespace {
constexpr double kReferenceNoiseDbm = -70.65;  // 2.16 GHz, NF 10 dB
constexpr double kControlMinSinrDb = -1.0;
}  // namespace

McsTable McsTable::defaults() {
  struct Row {
    int id;
    PhyMode mode;
    double mbps;
    double sens;
  };
  // Rates and sensitivities of the DMG control, SC and OFDM PHYs.
  static constexpr Row rows[] = {
      {0, PhyMode::control, 27.5, -78},
      {1, PhyMode::single_carrier, 385, -68},      {2, PhyMode::single_carrier, 770, -66},
      {3, PhyMode::single_carrier, 962.5, -65},    {4, PhyMode::single_carrier, 1155, -64},
      {5, PhyMode::single_carrier, 1251.25, -62},  {6, PhyMode::single_carrier, 1540, -63},
      {7, PhyMode::single_carrier, 1925, -62},     {8, PhyMode::single_carrier, 2310, -61},
      {9, PhyMode::single_carrier, 2502.5, -59},   {10, PhyMode::single_carrier, 3080, -55},
      {11, PhyMode::single_carrier, 3850, -54},    {12, PhyMode::single_carrier, 4620, -53},
      {13, PhyMode::ofdm, 693, -66},               {14, PhyMode::ofdm, 866.25, -64},
      {15, PhyMode::ofdm, 1386, -63},              {16, PhyMode::ofdm, 1732.5, -62},
      {17, PhyMode::ofdm, 2079, -60},              {18, PhyMode::ofdm, 2772, -58},
      {19, PhyMode::ofdm, 3465, -56},              {20, PhyMode::ofdm, 4158, -54},
      {21, PhyMode::ofdm, 4504.5, -53},            {22, PhyMode::ofdm, 5197.5, -51},
      {23, PhyMode::ofdm, 6237, -49},              {24, PhyMode::ofdm, 6756.75, -47},
  };
  McsTable t;
  for (const auto& r : rows) {
    // SC/OFDM: the SNR at sensitivity over the default noise floor, so the
    // sensitivity binds without interference. Control PHY gets a fixed margin.
    const double min_sinr = r.mode == PhyMode::control ? kControlMinSinrDb : r.sens - kReferenceNoiseDbm;
    t.entries_.push_back(McsEntry{r.id, r.mode, mbps_to_bps(r.mbps), r.sens, min_sinr});
  }
  return t;
}

McsTable McsTable::parse(std::istream& is) {
  McsTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    McsEntry e;
    std::string mode;
    double mbps = 0;
    if (!(ls >> e.id >> mode >> mbps >> e.sensitivity_dbm >> e.min_sinr_db)) {
      if (line_no == 1 && line.rfind("id", 0) == 0) continue;  // header
      throw std::invalid_argument("malformed MCS table line " + std::to_string(line_no));
    }
    e.phy_mode = parse_phy_mode(mode);
    if (!(mbps > 0)) throw std::invalid_argument("MCS rate must be positive (line " + std::to_string(line_no) + ")");
    e.data_rate_bps = mbps_to_bps(mbps);
    if (t.contains(e.id)) throw std::invalid_argument("duplicate MCS id " + std::to_string(e.id));
    t.entries_.push_back(e);
  }
  if (t.entries_.empty()) throw std::invalid_argument("empty MCS table");
  return t;
}

McsTable McsTable::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open MCS table " + path);
  return parse(f);
}

bool McsTable::contains(int id) const {
  return std::any_of(entries_.begin(), entries_.end(), [id](const McsEntry& e) { return e.id == id; });
}

const McsEntry& McsTable::at(int id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  throw std::out_of_range("MCS " + std::to_string(id) + " not in table");
}

McsEntry& McsTable::at(int id) { return const_cast<McsEntry&>(std::as_const(*this).at(id)); }

double AntennaConfig::sector_width() const { return 2 * std::numbers::pi / n_sectors; }

double AntennaConfig::sector_center(int sector) const { return boresight - sector * sector_width(); }

double conserving_peak_gain_dbi(int n_sectors, double sidelobe_gain_dbi) {
  if (n_sectors < 2) throw std::invalid_argument("n_sectors must be >= 2");
  // Composite Simpson over u in [0, 1] of the normalized main-lobe shape.
  constexpr int kIntervals = 2000;
  const auto shape = [](double u) { return std::pow(10.0, -kSectorEdgeRolloffDb * u * u / 10.0); };
  const double h = 1.0 / kIntervals;
  double sum = shape(0.0) + shape(1.0);
  for (int i = 1; i < kIntervals; ++i) sum += shape(i * h) * (i % 2 ? 4.0 : 2.0);
  const double lobe_mean = sum * h / 3.0;
  const double n = n_sectors;
  const double side = std::pow(10.0, sidelobe_gain_dbi / 10.0);
  const double peak = (n - (n - 1) * side) / lobe_mean;
  if (!(peak > side)) throw std::invalid_argument("sidelobe too strong for a conserving pattern");
  return 10.0 * std::log10(peak);
}

double antenna_gain_db(const AntennaConfig& cfg, AntennaMode mode, double bearing_to_peer) {
  if (mode.quasi_omni) return cfg.quasi_omni_gain_dbi;
  const double half = cfg.sector_width() / 2;
  const double offset = std::abs(wrap_pi(bearing_to_peer - cfg.sector_center(mode.sector)));
  if (offset > half) return cfg.sidelobe_gain_dbi;
  const double u = offset / half;
  return cfg.peak_gain_dbi - kSectorEdgeRolloffDb * u * u;
}

int closest_sector(const AntennaConfig& cfg, double bearing_to_peer) {
  int best = 0;
  double best_offset = 10.0;
  for (int s = 0; s < cfg.n_sectors; ++s) {
    const double off = std::abs(wrap_pi(bearing_to_peer - cfg.sector_center(s)));
    if (off < best_offset) {
      best_offset = off;
      best = s;
    }
  }
  return best;
}

double rx_power_dbm(double tx_gain_db, double rx_gain_db, double p_tx_dbm, double path_loss_db) {
  return tx_gain_db + rx_gain_db + p_tx_dbm - path_loss_db;
}

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

const char* to_string(DecodeOutcome outcome) {
  switch (outcome) {
    case DecodeOutcome::ok: return "ok";
    case DecodeOutcome::fail_sensitivity: return "fail_sensitivity";
    case DecodeOutcome::fail_sinr: return "fail_sinr";
  }
  return "?";
}

double sinr_db(double p_signal_dbm, std::span<const double> interferers_dbm, double noise_dbm) {
  double denom = dbm_to_mw(noise_dbm);
  for (double i : interferers_dbm) denom += dbm_to_mw(i);
  return p_signal_dbm - mw_to_dbm(denom);
}

DecodeOutcome decode_outcome(double p_signal_dbm, std::span<const double> interferers_dbm, const McsEntry& mcs,
                             double noise_dbm) {
  if (p_signal_dbm < mcs.sensitivity_dbm) return DecodeOutcome::fail_sensitivity;
  if (sinr_db(p_signal_dbm, interferers_dbm, noise_dbm) < mcs.min_sinr_db) return DecodeOutcome::fail_sinr;
  return DecodeOutcome::ok;
}

SimTime PreambleDurations::for_mode(PhyMode mode) const {
  switch (mode) {
    case PhyMode::control: return control;
    case PhyMode::single_carrier: return single_carrier;
    case PhyMode::ofdm: return ofdm;
  }
  return control;
}

SimTime frame_airtime(std::size_t payload_bytes, const McsEntry& mcs, const PreambleDurations& preambles) {
  if (payload_bytes == 0) throw std::invalid_argument("frame_airtime: empty payload");
  if (mcs.data_rate_bps == 0) throw std::invalid_argument("frame_airtime: zero data rate");
  const auto bits = static_cast<std::uint64_t>(payload_bytes) * 8;
  const std::uint64_t payload_ns = (bits * 1'000'000'000ULL + mcs.data_rate_bps - 1) / mcs.data_rate_bps;
  return preambles.for_mode(mcs.phy_mode) + SimTime::from_ns(static_cast<std::int64_t>(payload_ns));
}

}  // namespace mmv2v
