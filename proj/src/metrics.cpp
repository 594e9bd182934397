#include "mmv2v/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "mmv2v/radio.hpp"

namespace mmv2v {

double SnapshotMetrics::no_concurrency() const {
  double f = 0.0;
  for (std::size_t k = 0; k < concurrency.size() && k <= 1; ++k) f += concurrency[k];
  return f;
}

double SnapshotMetrics::concurrency_bucket(int k) const {
  if (k <= 1) return no_concurrency();
  if (k < 4) return static_cast<std::size_t>(k) < concurrency.size() ? concurrency[k] : 0.0;
  double f = 0.0;
  for (std::size_t j = 4; j < concurrency.size(); ++j) f += concurrency[j];
  return f;
}

namespace {

struct PcpAccumulator {
  bool seen_bi = false;
  bool traffic = false;
  SimTime generated;
  std::vector<std::set<StationId>> beacon_rx;
  std::vector<std::set<StationId>> fbck_rx;
  std::vector<int> acks;
  std::vector<int> reqs;
  std::optional<SimTime> first_sp;
  struct Window {
    int bi;
    SimTime start, end;
  };
  std::vector<Window> windows;  // allocated SPs
  int allocated = 0;
  long delivered = 0;
  int n_bis = 0;
  int potential_sps = 0;

  void ensure_bi(int bi) {
    if (bi < 0) throw MetricsError("negative BI index in trace");
    const auto need = static_cast<std::size_t>(bi) + 1;
    if (beacon_rx.size() < need) {
      beacon_rx.resize(need);
      fbck_rx.resize(need);
      acks.resize(need, 0);
      reqs.resize(need, 0);
    }
  }
};

}  // namespace

SnapshotMetrics summarize_snapshot(const Trace& trace, const SummaryConfig& cfg) {
  const int n = trace.n_stations;
  if (n <= 0) throw MetricsError("trace without stations");
  std::vector<PcpAccumulator> acc(n);
  std::vector<std::pair<SimTime, int>> edges;  // data airtime boundaries
  const auto check_station = [n](StationId s) {
    if (s < 0 || s >= n) throw MetricsError("trace references unknown station " + std::to_string(s));
  };

  SimTime last;
  for (const auto& r : trace.records) {
    if (r.time < last) throw MetricsError("trace records out of time order");
    last = r.time;
    check_station(r.station);
    if (r.peer != kBroadcast) check_station(r.peer);
    switch (r.event) {
      case TraceEvent::bi_start: {
        auto& a = acc[r.station];
        a.seen_bi = true;
        a.ensure_bi(r.bi);
        a.n_bis = std::max(a.n_bis, r.bi + 1);
        // only SPs that end inside the snapshot count
        for (int k = 1; k <= cfg.n_sp; ++k) {
          if (r.start + cfg.bhi + cfg.sp_duration * k <= trace.duration) ++a.potential_sps;
        }
        break;
      }
      case TraceEvent::traffic_generated:
        acc[r.station].traffic = true;
        acc[r.station].generated = r.time;
        break;
      case TraceEvent::sp_allocated: {
        auto& a = acc[r.station];
        if (!a.seen_bi) throw MetricsError("SP allocation before any BI start");
        if (r.end <= trace.duration) ++a.allocated;
        a.windows.push_back({r.bi, r.start, r.end});
        if (!a.first_sp || r.start < *a.first_sp) a.first_sp = r.start;
        break;
      }
      case TraceEvent::tx:
        if (r.kind == FrameKind::data) {
          if (r.end < r.start) throw MetricsError("data frame ends before it starts");
          edges.emplace_back(r.start, +1);
          edges.emplace_back(r.end, -1);
        } else if (r.kind == FrameKind::ati_req) {
          auto& a = acc[r.station];
          if (!a.seen_bi) throw MetricsError("REQ before any BI start");
          a.ensure_bi(r.bi);
          ++a.reqs[r.bi];
        }
        break;
      case TraceEvent::rx: {
        if (r.status != RxStatus::ok) break;
        switch (r.kind) {
          case FrameKind::dmg_beacon: {
            auto& a = acc[r.peer];
            a.ensure_bi(r.bi);
            a.beacon_rx[r.bi].insert(r.station);
            break;
          }
          case FrameKind::ssw_fbck: {
            auto& a = acc[r.peer];
            a.ensure_bi(r.bi);
            a.fbck_rx[r.bi].insert(r.station);
            break;
          }
          case FrameKind::ati_ack: {
            auto& a = acc[r.station];
            a.ensure_bi(r.bi);
            ++a.acks[r.bi];
            break;
          }
          case FrameKind::data: {
            auto& a = acc[r.peer];
            const auto w = std::find_if(a.windows.rbegin(), a.windows.rend(), [&](const auto& w) {
              return w.bi == r.bi && w.start <= r.start && r.start < w.end;
            });
            if (w == a.windows.rend()) throw MetricsError("data frame outside an allocated SP");
            if (w->end <= trace.duration) ++a.delivered;
            break;
          }
          default: break;
        }
        break;
      }
      case TraceEvent::tx_dropped: break;
    }
  }

  SnapshotMetrics m;
  for (int p = 0; p < n; ++p) {
    auto& a = acc[p];
    if (!a.seen_bi) {
      if (!a.beacon_rx.empty() || a.delivered > 0) throw MetricsError("PCP activity without a BI start");
      continue;
    }
    PcpMetrics pm;
    pm.pcp = p;
    pm.n_bis = a.n_bis;
    pm.potential_sps = a.potential_sps;
    for (std::size_t b = 0; b < a.beacon_rx.size(); ++b) {
      pm.per_bi.push_back(HandshakeCounts{static_cast<int>(a.beacon_rx[b].size()), static_cast<int>(a.fbck_rx[b].size()),
                                          a.acks[b], a.reqs[b]});
    }
    if (!pm.per_bi.empty()) pm.first_bi = pm.per_bi.front();
    if (a.first_sp) {
      if (!a.traffic) throw MetricsError("SP allocated without traffic generation");
      pm.delay_first_sp_ms = (*a.first_sp - a.generated).ms();
    }
    pm.allocated_sps = a.allocated;
    pm.delivered = a.delivered;
    const double potential = static_cast<double>(a.potential_sps) * cfg.packets_per_sp;
    pm.normalized_pdr = potential > 0 ? static_cast<double>(a.delivered) / potential : 0.0;
    if (a.allocated > 0 && cfg.packets_per_sp > 0) {
      pm.allocated_sp_pdr = static_cast<double>(a.delivered) / (static_cast<double>(a.allocated) * cfg.packets_per_sp);
    }
    m.pcps.push_back(std::move(pm));
  }

  // Sweep over data airtime boundaries; ends sort before starts at equal times.
  std::sort(edges.begin(), edges.end());
  const double total = static_cast<double>(trace.duration.ns());
  if (total <= 0) throw MetricsError("trace duration must be positive");
  std::vector<double> time_at(1, 0.0);
  int active = 0;
  SimTime prev;
  for (const auto& [t, delta] : edges) {
    if (t > prev) {
      if (static_cast<std::size_t>(active) >= time_at.size()) time_at.resize(active + 1, 0.0);
      time_at[active] += static_cast<double>((t - prev).ns());
      prev = t;
    }
    active += delta;
    if (active < 0) throw MetricsError("unbalanced data airtime intervals");
  }
  if (trace.duration > prev) time_at[0] += static_cast<double>((trace.duration - prev).ns());
  m.concurrency.resize(time_at.size());
  for (std::size_t k = 0; k < time_at.size(); ++k) m.concurrency[k] = time_at[k] / total;
  return m;
}

std::vector<int> ideal_neighbor_counts(const Scenario& scenario, const RadioConfig& radio, int control_mcs) {
  const double peak = radio.resolved_peak_gain_dbi();
  const double noise = radio.noise_dbm();
  const McsEntry& mcs = radio.mcs.at(control_mcs);
  std::vector<int> out;
  for (StationId p : scenario.pcp_set()) {
    int count = 0;
    for (const auto& v : scenario.vehicles) {
      if (v.id == p) continue;
      const Vec2 a = scenario.position(p);
      const Vec2 b = v.center;
      const double pl = path_loss_db(std::max(distance(a, b), 1e-3), count_blockers(a, b, scenario, p, v.id));
      if (decode_outcome(rx_power_dbm(peak, peak, radio.p_tx_dbm, pl), {}, mcs, noise) == DecodeOutcome::ok) ++count;
    }
    out.push_back(count);
  }
  return out;
}

double ideal_neighbor_benchmark(const Scenario& scenario, const RadioConfig& radio, int control_mcs) {
  const auto counts = ideal_neighbor_counts(scenario, radio, control_mcs);
  if (counts.empty()) return 0.0;
  double sum = 0;
  for (int c : counts) sum += c;
  return sum / static_cast<double>(counts.size());
}

MeanCi MeanCi::of(const std::vector<double>& samples) {
  MeanCi r;
  r.n = samples.size();
  if (r.n == 0) return r;
  double sum = 0;
  for (double v : samples) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0;
    for (double v : samples) ss += (v - r.mean) * (v - r.mean);
    r.ci = 1.96 * std::sqrt(ss / static_cast<double>(r.n - 1)) / std::sqrt(static_cast<double>(r.n));
  }
  return r;
}

std::vector<CampaignRow> aggregate(const std::vector<CellSnapshot>& snapshots) {
  struct Group {
    std::size_t n = 0;
    std::vector<double> beacons, fbck, acks, delay, npdr, alloc;
    double c0 = 0, c2 = 0, c3 = 0, c4 = 0;
  };
  std::map<std::pair<double, int>, Group> groups;
  for (const auto& s : snapshots) {
    auto& g = groups[{s.pcp_probability, s.n_abft_slots}];
    ++g.n;
    for (const auto& p : s.metrics.pcps) {
      g.beacons.push_back(p.first_bi.beacon_responders);
      g.fbck.push_back(p.first_bi.fbck_responders);
      g.acks.push_back(p.first_bi.acks);
      if (p.delay_first_sp_ms) g.delay.push_back(*p.delay_first_sp_ms);
      g.npdr.push_back(p.normalized_pdr);
      if (p.allocated_sp_pdr) g.alloc.push_back(*p.allocated_sp_pdr);
    }
    g.c0 += s.metrics.no_concurrency();
    g.c2 += s.metrics.concurrency_bucket(2);
    g.c3 += s.metrics.concurrency_bucket(3);
    g.c4 += s.metrics.concurrency_bucket(4);
  }
  std::vector<CampaignRow> rows;
  for (const auto& [key, g] : groups) {
    CampaignRow r;
    r.pcp_probability = key.first;
    r.n_abft_slots = key.second;
    r.n_snapshots = g.n;
    r.beacons = MeanCi::of(g.beacons);
    r.fbck = MeanCi::of(g.fbck);
    r.acks = MeanCi::of(g.acks);
    r.delay_ms = MeanCi::of(g.delay);
    r.npdr = MeanCi::of(g.npdr);
    r.alloc_pdr = MeanCi::of(g.alloc);
    const double n = static_cast<double>(g.n);
    r.conc0 = g.c0 / n;
    r.conc2 = g.c2 / n;
    r.conc3 = g.c3 / n;
    r.conc4 = g.c4 / n;
    rows.push_back(r);
  }
  return rows;
}

void write_csv_header(std::ostream& os) {
  os << "pcp_prob,n_abft,n_snapshots,beacons_mean,beacons_ci,fbck_mean,fbck_ci,acks_mean,acks_ci,"
        "delay_ms_mean,delay_ms_ci,npdr_mean,npdr_ci,alloc_pdr_mean,conc0,conc2,conc3,conc4\n";
}

void write_csv_row(std::ostream& os, const CampaignRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.2f,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                r.pcp_probability, r.n_abft_slots, r.n_snapshots, r.beacons.mean, r.beacons.ci, r.fbck.mean,
                r.fbck.ci, r.acks.mean, r.acks.ci, r.delay_ms.mean, r.delay_ms.ci, r.npdr.mean, r.npdr.ci,
                r.alloc_pdr.mean, r.conc0, r.conc2, r.conc3, r.conc4);
  os << buf;
}

void write_csv(std::ostream& os, const std::vector<CampaignRow>& rows) {
  write_csv_header(os);
  for (const auto& r : rows) write_csv_row(os, r);
}

}  // namespace mmv2v
