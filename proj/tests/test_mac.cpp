#include <doctest.h>

#include <algorithm>
#include <map>
#include <numbers>
#include <set>
#include <tuple>
#include <vector>

#include "fixtures.hpp"
#include "mmv2v/mac.hpp"
#include "mmv2v/metrics.hpp"

using namespace mmv2v;
using mmv2v::test::make_scenario;

namespace {

SimParams params_for(int slots) {
  SimParams p;
  p.mac.bi.n_abft_slots = slots;
  p.mac.bi.n_sp = slots;
  return p;
}

std::vector<TraceRecord> select(const Trace& t, TraceEvent ev, FrameKind kind) {
  std::vector<TraceRecord> out;
  for (const auto& r : t.records) {
    if (r.event == ev && r.kind == kind) out.push_back(r);
  }
  return out;
}

// PCP in lane 1, responder 7 m behind in the same lane.
Scenario single_link() { return make_scenario({{1, 40.0, true}, {1, 33.0, false}}); }

Trace random_snapshot(std::uint64_t seed, double prob, int slots) {
  SimParams p = params_for(slots);
  p.scenario.pcp_probability = prob;
  Rng rng(derive_seed(seed, 0xD3));
  SnapshotSimulator sim(deploy(p.scenario, rng), p, seed);
  return sim.run();
}

}  // namespace

TEST_SUITE("mac") {

TEST_CASE("header and interval lengths") {
  const double bhi_ms[] = {25.6, 30.72, 35.84, 40.96, 46.08, 51.20};
  const std::int64_t bhi_ns[] = {25'600'000, 30'720'000, 35'840'000, 40'960'000, 46'080'000, 51'200'000};
  for (int n = 3; n <= 8; ++n) {
    BiConfig c;
    c.n_abft_slots = n;
    CHECK(c.abft_tu() == 5 * n);
    CHECK(c.bhi().ns() == bhi_ns[n - 3]);
    CHECK(c.bhi().ms() == doctest::Approx(bhi_ms[n - 3]));
  }
  BiConfig c;
  c.n_abft_slots = 4;
  c.n_sp = 4;
  CHECK(c.bi() == SimTime::from_us(230'720));
  CHECK(c.bi() * 8 <= SimTime::from_s(2));
  CHECK(c.bi() * 9 > SimTime::from_s(2));
  CHECK(c.sp_start(SimTime{}, 2) == c.bhi() + SimTime::from_ms(100));
}

TEST_CASE("airtime fits are validated") {
  SimParams p;
  CHECK_NOTHROW(p.validate());
  p.mac.ssw_bytes = 1000;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.mac.beacon_bytes = 2000;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.mac.bi.n_sp = 400;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.mac.data_mcs = 77;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("beam record keeps the argmax") {
  BeamRecord b;
  CHECK(b.observe(3, -70));
  CHECK(b.best_peer_sector == 3);
  CHECK(b.observe(5, -65));
  CHECK(b.best_peer_sector == 5);
  CHECK_FALSE(b.observe(6, -69));
  CHECK(b.best_peer_sector == 5);
  CHECK(b.best_rx_power == -65);
}

TEST_CASE("beacon sweep covers every sector once, clockwise, inside the BTI") {
  const auto p = params_for(4);
  SnapshotSimulator sim(single_link(), p, 5);
  const auto& t = sim.run();
  const auto starts = sim.bi_starts(0);
  const auto beacons = select(t, TraceEvent::tx, FrameKind::dmg_beacon);
  for (std::size_t b = 0; b < starts.size(); ++b) {
    std::vector<TraceRecord> sweep;
    for (const auto& r : beacons) {
      if (r.bi == static_cast<int>(b)) sweep.push_back(r);
    }
    REQUIRE(sweep.size() == 14);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      CHECK(sweep[i].index == (sweep[i - 1].index + 1) % 14);
      CHECK(sweep[i].start >= sweep[i - 1].end);
    }
    CHECK(sweep.front().start == starts[b]);
    CHECK(sweep.back().end <= starts[b] + p.mac.bi.bti());
  }
}

TEST_CASE("single link completes the handshake in the first BI") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto p = params_for(4);
    SnapshotSimulator sim(single_link(), p, seed);
    const SimTime bi0 = sim.bi_starts(0).front();
    CHECK(bi0 <= kTimeUnit);
    sim.run_until(bi0 + p.mac.bi.bhi());

    CHECK(sim.handshake_complete(1, 0));
    const double to_resp = bearing(sim.scenario().position(0), sim.scenario().position(1));
    const double to_pcp = bearing(sim.scenario().position(1), sim.scenario().position(0));
    CHECK(sim.pcp_beam(0, 1).best_tx_sector == closest_sector(sim.antenna(0), to_resp));
    CHECK(sim.responder_beam(1, 0).best_tx_sector == closest_sector(sim.antenna(1), to_pcp));

    sim.run();
    const auto m = summarize_snapshot(sim.trace(), SummaryConfig::from(p));
    REQUIRE(m.pcps.size() == 1);
    const auto& pm = m.pcps[0];
    CHECK(pm.first_bi.beacon_responders == 1);
    CHECK(pm.first_bi.fbck_responders == 1);
    CHECK(pm.first_bi.acks == 1);
    REQUIRE(pm.delay_first_sp_ms);
    CHECK(*pm.delay_first_sp_ms == p.mac.bi.bhi().ms());
    REQUIRE(pm.allocated_sp_pdr);
    CHECK(*pm.allocated_sp_pdr == 1.0);
    // one responder: SP 1 of every BI, including the last (it ends before 2 s)
    CHECK(pm.n_bis == 9);
    CHECK(pm.allocated_sps == 9);
    CHECK(pm.delivered == 600L * pm.allocated_sps);
  }
}

TEST_CASE("best sectors do not depend on transmit power") {
  auto lo = params_for(4);
  auto hi = lo;
  hi.radio.p_tx_dbm += 6.0;
  SnapshotSimulator a(single_link(), lo, 17), b(single_link(), hi, 17);
  const SimTime t = a.bi_starts(0).front() + lo.mac.bi.bhi();
  a.run_until(t);
  b.run_until(t);
  CHECK(a.pcp_beam(0, 1).best_tx_sector == b.pcp_beam(0, 1).best_tx_sector);
  CHECK(a.pcp_beam(0, 1).best_peer_sector == b.pcp_beam(0, 1).best_peer_sector);
  CHECK(a.responder_beam(1, 0).best_tx_sector == b.responder_beam(1, 0).best_tx_sector);
  CHECK(a.responder_beam(1, 0).best_peer_sector == b.responder_beam(1, 0).best_peer_sector);
}

TEST_CASE("simultaneous SSW sweeps in one slot collide") {
  // one slot forces both responders into it
  auto p = params_for(4);
  p.mac.bi.n_abft_slots = 1;
  p.mac.bi.n_sp = 2;
  int collided = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SnapshotSimulator sim(make_scenario({{1, 40.0, true}, {1, 33.0, false}, {1, 47.0, false}}), p, seed);
    const auto& t = sim.run();
    const auto ssw_tx = select(t, TraceEvent::tx, FrameKind::ssw);
    for (const auto& r : select(t, TraceEvent::rx, FrameKind::ssw)) {
      if (r.status != RxStatus::fail_sinr) continue;
      ++collided;
      const bool overlapped = std::any_of(ssw_tx.begin(), ssw_tx.end(), [&](const TraceRecord& o) {
        return o.station != r.peer && o.start < r.end && r.start < o.end;
      });
      CHECK(overlapped);
    }
  }
  CHECK(collided > 0);
}

TEST_CASE("no PCP, no traffic") {
  const auto p = params_for(4);
  SnapshotSimulator sim(make_scenario({{0, 10.0, false}, {1, 20.0, false}}), p, 1);
  const auto& t = sim.run();
  CHECK(t.records.empty());
  const auto m = summarize_snapshot(t, SummaryConfig::from(p));
  CHECK(m.pcps.empty());
  CHECK(m.concurrency.at(0) == 1.0);
}

TEST_CASE("two separated links share the same SPs") {
  // blocked from each other by a truck-like wall of cars in the middle lanes
  const auto s = make_scenario({{0, 10.0, true},
                                {0, 16.0, false},
                                {3, 70.0, true},
                                {3, 64.0, false},
                                {1, 40.0, false},
                                {2, 40.0, false},
                                {1, 46.0, false},
                                {2, 46.0, false}});
  const auto p = params_for(4);
  SnapshotSimulator sim(s, p, 3);
  const auto m = summarize_snapshot(sim.run(), SummaryConfig::from(p));
  REQUIRE(m.pcps.size() == 2);
  for (const auto& pm : m.pcps) {
    REQUIRE(pm.allocated_sp_pdr);
    CHECK(*pm.allocated_sp_pdr > 0.9);
  }
  CHECK(m.concurrency.size() > 2);
  CHECK(m.concurrency.at(2) > 0.0);
}

TEST_CASE("same seed, same trace") {
  const auto a = random_snapshot(12, 0.3, 5);
  const auto b = random_snapshot(12, 0.3, 5);
  CHECK(a.records == b.records);
  const auto c = random_snapshot(13, 0.3, 5);
  CHECK_FALSE(a.records == c.records);
}

TEST_CASE("protocol invariants over random snapshots") {
  for (std::uint64_t seed = 100; seed < 124; ++seed) {
    const int slots = 3 + static_cast<int>(seed % 6);
    const double prob = seed % 2 ? 0.4 : 0.2;
    const auto t = random_snapshot(seed, prob, slots);
    const auto p = params_for(slots);
    const auto& bi = p.mac.bi;
    CAPTURE(seed);

    // BI windows per PCP
    std::map<std::pair<StationId, int>, SimTime> bi_start;
    for (const auto& r : t.records) {
      if (r.event == TraceEvent::bi_start) bi_start[{r.station, r.bi}] = r.start;
    }

    // REQ count, indices and SP mapping
    std::map<std::pair<StationId, int>, int> fbck, reqs;
    std::map<std::pair<StationId, int>, std::set<int>> req_idx;
    for (const auto& r : t.records) {
      if (r.event != TraceEvent::tx) continue;
      if (r.kind == FrameKind::ssw_fbck) ++fbck[{r.station, r.bi}];
      if (r.kind == FrameKind::ati_req) ++reqs[{r.station, r.bi}];
    }
    for (const auto& [key, start] : bi_start) {
      if (start + bi.bhi() > t.duration) continue;  // header cut by the snapshot end
      CHECK(reqs[key] == std::min(bi.n_sp, fbck[key]));
    }
    for (const auto& r : select(t, TraceEvent::sp_allocated, FrameKind::data)) {
      const SimTime b0 = bi_start.at({r.station, r.bi});
      CHECK(r.index < reqs[{r.station, r.bi}]);
      CHECK(r.start == bi.sp_start(b0, r.index));
      CHECK(r.end == r.start + bi.sp_duration);
    }

    // a responder sweeps SSW only toward a PCP whose beacon it decoded in that BI
    std::set<std::tuple<StationId, StationId, int>> heard;
    for (const auto& r : t.records) {
      if (r.event == TraceEvent::rx && r.kind == FrameKind::dmg_beacon && r.status == RxStatus::ok) {
        heard.insert({r.station, r.peer, r.bi});
      }
      if (r.event == TraceEvent::tx && r.kind == FrameKind::ssw) REQUIRE(heard.count({r.station, r.peer, r.bi}) == 1);
    }

    // half duplex: own transmissions never overlap each other or a decoded reception
    std::map<StationId, std::vector<std::pair<SimTime, SimTime>>> tx;
    for (const auto& r : t.records) {
      if (r.event == TraceEvent::tx) tx[r.station].push_back({r.start, r.end});
    }
    for (auto& [s, v] : tx) {
      std::sort(v.begin(), v.end());
      for (std::size_t i = 1; i < v.size(); ++i) REQUIRE(v[i - 1].second <= v[i].first);
    }
    for (const auto& r : t.records) {
      if (r.event != TraceEvent::rx || r.status != RxStatus::ok) continue;
      for (const auto& [a, b] : tx[r.station]) REQUIRE_FALSE((a < r.end && r.start < b));
    }

    // data only inside the sender's allocated SPs
    std::map<std::pair<StationId, int>, std::vector<TraceRecord>> sps;
    for (const auto& r : select(t, TraceEvent::sp_allocated, FrameKind::data)) sps[{r.station, r.bi}].push_back(r);
    for (const auto& r : select(t, TraceEvent::tx, FrameKind::data)) {
      const auto& v = sps[{r.station, r.bi}];
      REQUIRE(std::any_of(v.begin(), v.end(), [&](const TraceRecord& sp) {
        return sp.peer == r.peer && sp.start <= r.start && r.end <= sp.end;
      }));
    }
    for (const auto& r : t.records) {
      if (r.event == TraceEvent::tx || r.event == TraceEvent::rx) REQUIRE(r.end <= t.duration);
    }
  }
}

}  // TEST_SUITE
