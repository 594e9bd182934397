#include "mmv2v/mac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mmv2v {

bool BeamRecord::observe(int peer_sector, double p_rx_dbm) {
  if (p_rx_dbm > best_rx_power || (p_rx_dbm == best_rx_power && peer_sector < best_peer_sector)) {
    best_rx_power = p_rx_dbm;
    best_peer_sector = peer_sector;
    return true;
  }
  return false;
}

SnapshotSimulator::SnapshotSimulator(Scenario scenario, SimParams params, std::uint64_t seed)
    : scenario_(std::move(scenario)), params_(std::move(params)), n_(scenario_.size()) {
  params_.validate();
  if (scenario_.is_pcp.size() != n_) throw ConfigError("scenario role vector does not match vehicle count");

  const auto& mac = params_.mac;
  const auto& bi = mac.bi;
  noise_dbm_ = params_.radio.noise_dbm();
  p_tx_dbm_ = params_.radio.p_tx_dbm;

  beacon_air_ = airtime(FrameKind::dmg_beacon);
  ssw_air_ = airtime(FrameKind::ssw);
  fbck_air_ = airtime(FrameKind::ssw_fbck);
  req_air_ = airtime(FrameKind::ati_req);
  ack_air_ = airtime(FrameKind::ati_ack);
  data_air_ = airtime(FrameKind::data);
  const std::int64_t n_sec = params_.radio.n_sectors;
  ssw_sweep_len_ = ssw_air_ * n_sec + mac.sbifs * (n_sec - 1);
  fbck_tail_ = SimTime::from_ns(std::llround(mac.fbck_tail_fraction * static_cast<double>(bi.abft_slot().ns())));
  exchange_len_ = req_air_ + ack_air_ + mac.sifs * 2;
  air_retention_ = std::max({beacon_air_, ssw_air_, fbck_air_, req_air_, ack_air_, data_air_}) + SimTime::from_us(1);

  pl_.assign(n_ * n_, 0.0);
  bearing_.assign(n_ * n_, 0.0);
  blockers_.assign(n_ * n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const auto a = static_cast<StationId>(i);
      const auto b = static_cast<StationId>(j);
      const Vec2 pa = scenario_.position(a);
      const Vec2 pb = scenario_.position(b);
      blockers_[idx(a, b)] = count_blockers(pa, pb, scenario_, a, b);
      pl_[idx(a, b)] = path_loss_db(std::max(distance(pa, pb), 1e-3), blockers_[idx(a, b)]);
      bearing_[idx(a, b)] = bearing(pa, pb);
    }
  }
  interferer_mw_.assign(n_, 0.0);

  trace_.n_stations = static_cast<int>(n_);
  trace_.duration = params_.snapshot_duration;

  stations_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto& s = stations_[i];
    s.id = static_cast<StationId>(i);
    s.pcp = scenario_.is_pcp[i];
    s.rng = Rng(derive_seed(seed, 0x5747 + i));
    s.antenna = params_.radio.antenna(s.rng.uniform(0.0, 2 * std::numbers::pi));
    s.as_responder.resize(n_);
    s.as_pcp.resize(n_);
  }

  // Each PCP's BHIs are its earliest commitments, so they are reserved up front.
  // The last BI may be cut short by the end of the snapshot.
  for (auto& s : stations_) {
    if (!s.pcp) continue;
    const auto jitter = SimTime::from_ns(static_cast<std::int64_t>(s.rng.below(mac.max_start_jitter.ns() + 1)));
    for (SimTime t = jitter; t < params_.snapshot_duration; t += bi.bi()) {
      s.bi_starts.push_back(t);
      s.reservations.push_back(Reservation{t, t + bi.bhi(), s.id, AntennaMode::omni()});
    }
    for (std::size_t k = 0; k < s.bi_starts.size(); ++k) {
      queue_.schedule(s.bi_starts[k], [this, id = s.id, k] { start_bi(id, static_cast<int>(k)); });
    }
  }
}

const Trace& SnapshotSimulator::run() {
  run_until(params_.snapshot_duration);
  return trace_;
}

void SnapshotSimulator::run_until(SimTime t) { queue_.run_until(t); }

const BeamRecord& SnapshotSimulator::pcp_beam(StationId pcp, StationId responder) const {
  return stations_.at(pcp).as_pcp.at(responder).beam;
}

const BeamRecord& SnapshotSimulator::responder_beam(StationId responder, StationId pcp) const {
  return stations_.at(responder).as_responder.at(pcp).beam;
}

bool SnapshotSimulator::handshake_complete(StationId responder, StationId pcp) const {
  return stations_.at(responder).as_responder.at(pcp).handshake_complete;
}

// ---------------------------------------------------------------------------
// Medium

const McsEntry& SnapshotSimulator::mcs_for(FrameKind kind) const {
  switch (kind) {
    case FrameKind::dmg_beacon:
    case FrameKind::ssw:
    case FrameKind::ssw_fbck: return params_.radio.mcs.at(params_.mac.control_mcs);
    default: return params_.radio.mcs.at(params_.mac.data_mcs);
  }
}

SimTime SnapshotSimulator::airtime(FrameKind kind) const {
  const auto& mac = params_.mac;
  std::size_t bytes = 0;
  switch (kind) {
    case FrameKind::dmg_beacon: bytes = mac.beacon_bytes; break;
    case FrameKind::ssw: bytes = mac.ssw_bytes; break;
    case FrameKind::ssw_fbck: bytes = mac.ssw_fbck_bytes; break;
    case FrameKind::ati_req: bytes = mac.req_bytes; break;
    case FrameKind::ati_ack: bytes = mac.ack_bytes; break;
    case FrameKind::data: bytes = mac.data_bytes; break;
  }
  return frame_airtime(bytes, mcs_for(kind), params_.radio.preambles);
}

void SnapshotSimulator::transmit(const Frame& frame, AntennaMode mode) {
  const SimTime now = queue_.now();
  while (!air_.empty() && air_.front().end + air_retention_ < now) {
    air_.pop_front();
    ++first_air_id_;
  }
  const std::uint64_t id = next_frame_id_++;
  if (air_.empty()) first_air_id_ = id;
  const SimTime end = now + airtime(frame.kind);
  if (end > params_.snapshot_duration) return;  // would not finish inside the snapshot
  air_.push_back(AirFrame{id, frame, now, end, mode, stations_[frame.tx].antenna.boresight, &mcs_for(frame.kind)});
  record({now, TraceEvent::tx, frame.kind, RxStatus::ok, frame.tx, frame.rx, frame.bi,
          mode.quasi_omni ? -1 : mode.sector, now, end});
  queue_.schedule(end, [this, id] { on_frame_end(id); });
}

double SnapshotSimulator::power_at(const AirFrame& f, StationId r, AntennaMode rx_mode) const {
  const StationId t = f.frame.tx;
  AntennaConfig tx_ant = stations_[t].antenna;
  tx_ant.boresight = f.tx_boresight;
  const double gt = antenna_gain_db(tx_ant, f.tx_mode, bearing_[idx(t, r)]);
  const double gr = antenna_gain_db(stations_[r].antenna, rx_mode, bearing_[idx(r, t)]);
  return rx_power_dbm(gt, gr, p_tx_dbm_, pl_[idx(t, r)]);
}

RxStatus SnapshotSimulator::receive(const AirFrame& f, StationId r, double& p_signal) {
  const Station& st = stations_[r];
  const AntennaMode mode = mode_at(st, f.start);
  p_signal = power_at(f, r, mode);

  std::fill(interferer_mw_.begin(), interferer_mw_.end(), 0.0);
  bool any_interferer = false;
  for (const auto& g : air_) {
    if (g.id == f.id || g.start >= f.end || g.end <= f.start) continue;
    if (g.frame.tx == r) return RxStatus::fail_half_duplex;
    if (g.frame.tx == f.frame.tx) continue;
    // frames of one transmitter never overlap each other; keep the strongest
    const double mw = dbm_to_mw(power_at(g, r, mode));
    auto& slot = interferer_mw_[g.frame.tx];
    slot = std::max(slot, mw);
    any_interferer = true;
  }
  std::vector<double> interferers;
  if (any_interferer) {
    for (double mw : interferer_mw_) {
      if (mw > 0) interferers.push_back(mw_to_dbm(mw));
    }
  }
  switch (decode_outcome(p_signal, interferers, *f.mcs, noise_dbm_)) {
    case DecodeOutcome::ok: return RxStatus::ok;
    case DecodeOutcome::fail_sensitivity: return RxStatus::fail_sensitivity;
    case DecodeOutcome::fail_sinr: return RxStatus::fail_sinr;
  }
  return RxStatus::fail_sinr;
}

void SnapshotSimulator::on_frame_end(std::uint64_t id) {
  const AirFrame f = air_[id - first_air_id_];
  const auto deliver = [&](StationId r) {
    double p = 0.0;
    const RxStatus status = receive(f, r, p);
    record({queue_.now(), TraceEvent::rx, f.frame.kind, status, r, f.frame.tx, f.frame.bi, f.frame.sector_id, f.start,
            f.end});
    if (status != RxStatus::ok) return;
    switch (f.frame.kind) {
      case FrameKind::dmg_beacon: on_dmg_beacon(r, f.frame, p); break;
      case FrameKind::ssw: on_ssw(r, f.frame, p); break;
      case FrameKind::ssw_fbck: on_ssw_fbck(r, f.frame); break;
      case FrameKind::ati_req: on_ati_req(r, f.frame); break;
      case FrameKind::ati_ack: on_ati_ack(r, f.frame); break;
      case FrameKind::data: break;
    }
  };
  if (f.frame.rx == kBroadcast) {
    for (std::size_t r = 0; r < n_; ++r) {
      if (static_cast<StationId>(r) != f.frame.tx) deliver(static_cast<StationId>(r));
    }
  } else {
    deliver(f.frame.rx);
  }
}

bool SnapshotSimulator::channel_busy(StationId s, int sector) const {
  const SimTime now = queue_.now();
  double total = 0.0;
  for (const auto& g : air_) {
    if (g.frame.tx == s || g.start > now || g.end <= now) continue;
    total += dbm_to_mw(power_at(g, s, AntennaMode::directional(sector)));
  }
  return total > 0.0 && mw_to_dbm(total) > params_.mac.lbt_threshold_dbm;
}

// ---------------------------------------------------------------------------
// Commitments

AntennaMode SnapshotSimulator::mode_at(const Station& s, SimTime t) const {
  for (auto it = s.reservations.rbegin(); it != s.reservations.rend(); ++it) {
    if (it->start <= t && t < it->end) return it->mode;
  }
  return AntennaMode::omni();
}

bool SnapshotSimulator::conflicts(const Station& s, SimTime start, SimTime end, StationId owner) const {
  return std::any_of(s.reservations.begin(), s.reservations.end(), [&](const Reservation& r) {
    return r.owner != owner && r.start < end && start < r.end;
  });
}

bool SnapshotSimulator::reserve(Station& s, SimTime start, SimTime end, StationId owner, AntennaMode mode) {
  if (conflicts(s, start, end, owner)) return false;
  if (s.reservations.size() > 48) {
    const SimTime now = queue_.now();
    std::erase_if(s.reservations, [now](const Reservation& r) { return r.end < now; });
  }
  s.reservations.push_back(Reservation{start, end, owner, mode});
  return true;
}

// ---------------------------------------------------------------------------
// Beacon interval

void SnapshotSimulator::start_bi(StationId pcp, int bi) {
  auto& s = stations_[pcp];
  const auto& cfg = params_.mac.bi;
  const SimTime now = queue_.now();
  const int n_sec = params_.radio.n_sectors;

  s.antenna.boresight = s.rng.uniform(0.0, 2 * std::numbers::pi);
  s.ctx.bi = bi;
  s.ctx.bi_start = now;
  s.ctx.slot_decoded.assign(cfg.n_abft_slots, {});
  s.ctx.candidates.clear();
  s.ctx.req_targets.clear();
  s.ctx.allocated.clear();

  record({now, TraceEvent::bi_start, FrameKind::dmg_beacon, RxStatus::ok, pcp, kBroadcast, bi, cfg.n_sp, now,
          now + cfg.bi()});
  if (bi == 0) {
    record({now, TraceEvent::traffic_generated, FrameKind::data, RxStatus::ok, pcp, kBroadcast, bi,
            params_.mac.packets_per_sp, now, now});
  }

  const int first = static_cast<int>(s.rng.below(n_sec));
  for (int i = 0; i < n_sec; ++i) {
    Frame f;
    f.kind = FrameKind::dmg_beacon;
    f.tx = pcp;
    f.sector_id = (first + i) % n_sec;
    f.cdown = n_sec - 1 - i;
    f.n_abft_slots = cfg.n_abft_slots;
    f.bi = bi;
    f.bi_start = now;
    f.payload_bytes = params_.mac.beacon_bytes;
    queue_.schedule(now + (beacon_air_ + params_.mac.sbifs) * i,
                    [this, f] { transmit(f, AntennaMode::directional(f.sector_id)); });
  }
  for (int slot = 0; slot < cfg.n_abft_slots; ++slot) {
    const SimTime tail = cfg.slot_start(now, slot) + cfg.abft_slot() - fbck_tail_;
    queue_.schedule(tail, [this, pcp, bi, slot] { send_ssw_fbck(pcp, bi, slot); });
  }
  queue_.schedule(cfg.ati_start(now), [this, pcp, bi] { ati_run(pcp, bi); });
}

void SnapshotSimulator::on_dmg_beacon(StationId r, const Frame& f, double p_rx) {
  auto& link = stations_[r].as_responder[f.tx];
  if (link.bi != f.bi || link.bi_start != f.bi_start) link = ResponderLink{f.bi, f.bi_start, {}, false, false};
  link.beam.observe(f.sector_id, p_rx);
  if (!link.abft_scheduled) {
    link.abft_scheduled = true;
    const SimTime at = params_.mac.bi.abft_start(f.bi_start);
    queue_.schedule(std::max(at, queue_.now()), [this, r, pcp = f.tx, bi = f.bi] { abft_respond(r, pcp, bi); });
  }
}

void SnapshotSimulator::abft_respond(StationId r, StationId pcp, int bi) {
  auto& s = stations_[r];
  const auto& link = s.as_responder[pcp];
  if (link.bi != bi) return;
  const auto& cfg = params_.mac.bi;
  const int n_slots = cfg.n_abft_slots;
  const int slot = static_cast<int>(s.rng.below(static_cast<std::uint64_t>(n_slots)));
  const SimTime start = cfg.slot_start(link.bi_start, slot);
  const SimTime slot_end = start + cfg.abft_slot();
  const SimTime tail = slot_end - fbck_tail_;
  if (start < queue_.now() || conflicts(s, start, start + ssw_sweep_len_, pcp) || conflicts(s, tail, slot_end, pcp)) {
    record({queue_.now(), TraceEvent::tx_dropped, FrameKind::ssw, RxStatus::ok, r, pcp, bi, slot, start, slot_end});
    return;
  }
  reserve(s, start, start + ssw_sweep_len_, pcp, AntennaMode::omni());
  reserve(s, tail, slot_end, pcp, AntennaMode::omni());

  const int n_sec = params_.radio.n_sectors;
  const int first = static_cast<int>(s.rng.below(n_sec));
  for (int i = 0; i < n_sec; ++i) {
    Frame f;
    f.kind = FrameKind::ssw;
    f.tx = r;
    f.rx = pcp;
    f.sector_id = (first + i) % n_sec;
    f.cdown = n_sec - 1 - i;
    f.echoed_sector = link.beam.best_peer_sector;
    f.bi = bi;
    f.slot = slot;
    f.payload_bytes = params_.mac.ssw_bytes;
    queue_.schedule(start + (ssw_air_ + params_.mac.sbifs) * i,
                    [this, f] { transmit(f, AntennaMode::directional(f.sector_id)); });
  }
}

void SnapshotSimulator::on_ssw(StationId pcp, const Frame& f, double p_rx) {
  auto& s = stations_[pcp];
  if (!s.pcp || s.ctx.bi != f.bi || f.slot < 0 || f.slot >= static_cast<int>(s.ctx.slot_decoded.size())) return;
  auto& link = s.as_pcp[f.tx];
  if (link.bi != f.bi) link = PcpLink{f.bi, {}};
  link.beam.observe(f.sector_id, p_rx);
  link.beam.best_tx_sector = f.echoed_sector;
  auto& decoded = s.ctx.slot_decoded[f.slot];
  if (std::find(decoded.begin(), decoded.end(), f.tx) == decoded.end()) decoded.push_back(f.tx);
}

void SnapshotSimulator::send_ssw_fbck(StationId pcp, int bi, int slot) {
  auto& s = stations_[pcp];
  if (s.ctx.bi != bi) return;
  const auto& cfg = params_.mac.bi;
  const SimTime slot_end = cfg.slot_start(s.ctx.bi_start, slot) + cfg.abft_slot();
  SimTime t = queue_.now();
  for (StationId r : s.ctx.slot_decoded[slot]) {
    if (t + fbck_air_ > slot_end) break;
    const auto& beam = s.as_pcp[r].beam;
    Frame f;
    f.kind = FrameKind::ssw_fbck;
    f.tx = pcp;
    f.rx = r;
    f.sector_id = beam.best_tx_sector;
    f.feedback_sector = beam.best_peer_sector;
    f.bi = bi;
    f.slot = slot;
    f.payload_bytes = params_.mac.ssw_fbck_bytes;
    queue_.schedule(t, [this, f] { transmit(f, AntennaMode::directional(f.sector_id)); });
    s.ctx.candidates.push_back(r);
    t += fbck_air_ + params_.mac.sifs;
  }
}

void SnapshotSimulator::on_ssw_fbck(StationId r, const Frame& f) {
  auto& s = stations_[r];
  auto& link = s.as_responder[f.tx];
  if (link.bi != f.bi) return;
  link.handshake_complete = true;
  link.beam.best_tx_sector = f.feedback_sector;
  const auto& cfg = params_.mac.bi;
  const SimTime ati = cfg.ati_start(link.bi_start);
  // Waits for REQ pointed at the PCP for the whole ATI; lost if already committed elsewhere.
  reserve(s, ati, ati + cfg.ati(), f.tx, AntennaMode::directional(f.feedback_sector));
}

void SnapshotSimulator::ati_run(StationId pcp, int bi) {
  auto& s = stations_[pcp];
  if (s.ctx.bi != bi) return;
  const auto& cfg = params_.mac.bi;
  std::vector<StationId> pool = s.ctx.candidates;
  const std::size_t m = std::min<std::size_t>(cfg.n_sp, pool.size());
  if (pool.size() > m) {
    // partial Fisher-Yates: uniform subset in random order
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + s.rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
  }
  s.ctx.req_targets = pool;
  s.ctx.allocated.assign(m, false);

  const SimTime now = queue_.now();
  for (std::size_t k = 0; k < m; ++k) {
    const StationId r = pool[k];
    const int sector = s.as_pcp[r].beam.best_tx_sector;
    const SimTime t = now + exchange_len_ * static_cast<std::int64_t>(k);
    reserve(s, t, t + exchange_len_, pcp, AntennaMode::directional(sector));
    Frame f;
    f.kind = FrameKind::ati_req;
    f.tx = pcp;
    f.rx = r;
    f.sector_id = sector;
    f.bi = bi;
    f.sp_index = static_cast<int>(k);
    f.sp_start = cfg.sp_start(s.ctx.bi_start, static_cast<int>(k));
    f.sp_duration = cfg.sp_duration;
    f.payload_bytes = params_.mac.req_bytes;
    queue_.schedule(t, [this, f] { transmit(f, AntennaMode::directional(f.sector_id)); });
  }
}

void SnapshotSimulator::on_ati_req(StationId r, const Frame& f) {
  auto& s = stations_[r];
  const auto& link = s.as_responder[f.tx];
  if (link.bi != f.bi || !link.handshake_complete) return;
  const SimTime ack_start = queue_.now() + params_.mac.sifs;
  const SimTime sp_end = f.sp_start + f.sp_duration;
  if (conflicts(s, ack_start, ack_start + ack_air_, f.tx) || conflicts(s, f.sp_start, sp_end, f.tx)) {
    record({queue_.now(), TraceEvent::tx_dropped, FrameKind::ati_ack, RxStatus::ok, r, f.tx, f.bi, f.sp_index,
            f.sp_start, sp_end});
    return;
  }
  const int sector = link.beam.best_tx_sector;
  reserve(s, f.sp_start, sp_end, f.tx, AntennaMode::directional(sector));
  Frame ack;
  ack.kind = FrameKind::ati_ack;
  ack.tx = r;
  ack.rx = f.tx;
  ack.sector_id = sector;
  ack.bi = f.bi;
  ack.sp_index = f.sp_index;
  ack.payload_bytes = params_.mac.ack_bytes;
  queue_.schedule(ack_start, [this, ack] { transmit(ack, AntennaMode::directional(ack.sector_id)); });
}

void SnapshotSimulator::on_ati_ack(StationId pcp, const Frame& f) {
  auto& s = stations_[pcp];
  if (!s.pcp || s.ctx.bi != f.bi) return;
  const auto k = static_cast<std::size_t>(f.sp_index);
  if (k >= s.ctx.req_targets.size() || s.ctx.req_targets[k] != f.tx || s.ctx.allocated[k]) return;
  const auto& cfg = params_.mac.bi;
  const SimTime sp_start = cfg.sp_start(s.ctx.bi_start, f.sp_index);
  const SimTime sp_end = sp_start + cfg.sp_duration;
  const int sector = s.as_pcp[f.tx].beam.best_tx_sector;
  if (!reserve(s, sp_start, sp_end, pcp, AntennaMode::directional(sector))) return;
  s.ctx.allocated[k] = true;
  record({queue_.now(), TraceEvent::sp_allocated, FrameKind::data, RxStatus::ok, pcp, f.tx, f.bi, f.sp_index,
          sp_start, sp_end});
  sessions_.push_back(DataSession{pcp, f.tx, f.bi, f.sp_index, sector, sp_end, params_.mac.packets_per_sp});
  queue_.schedule(sp_start, [this, i = sessions_.size() - 1] { data_attempt(i); });
}

void SnapshotSimulator::data_attempt(std::size_t i) {
  auto& d = sessions_[i];
  const SimTime now = queue_.now();
  if (d.remaining <= 0 || now + data_air_ > d.sp_end) return;
  if (channel_busy(d.pcp, d.sector)) {
    const SimTime retry = now + params_.mac.lbt_backoff;
    if (retry + data_air_ <= d.sp_end) queue_.schedule(retry, [this, i] { data_attempt(i); });
    return;
  }
  Frame f;
  f.kind = FrameKind::data;
  f.tx = d.pcp;
  f.rx = d.rx;
  f.sector_id = d.sector;
  f.bi = d.bi;
  f.sp_index = d.sp_index;
  f.payload_bytes = params_.mac.data_bytes;
  transmit(f, AntennaMode::directional(d.sector));
  --d.remaining;
  if (d.remaining > 0) queue_.schedule(now + data_air_ + params_.mac.sifs, [this, i] { data_attempt(i); });
}

}  // namespace mmv2v
