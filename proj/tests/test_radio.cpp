#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "mmv2v/params.hpp"
#include "mmv2v/radio.hpp"
#include "mmv2v/rng.hpp"

using namespace mmv2v;
using doctest::Approx;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Hand-written model, independent of the library constants.
double reference_pl(double d, double a, double c) { return a * 10.0 * std::log10(d) + c + 15.0 * d / 1000.0; }

AntennaConfig antenna_14(double boresight = 0.0) {
  AntennaConfig a;
  a.n_sectors = 14;
  a.boresight = boresight;
  a.sidelobe_gain_dbi = -10.0;
  a.peak_gain_dbi = conserving_peak_gain_dbi(14, -10.0);
  a.quasi_omni_gain_dbi = 3.0;
  return a;
}

}  // namespace

TEST_SUITE("radio") {

TEST_CASE("path loss examples") {
  CHECK(path_loss_db(1, 0) == Approx(70.015).epsilon(1e-12));
  CHECK(path_loss_db(10, 0) == Approx(87.85).epsilon(1e-12));
  CHECK(path_loss_db(50, 2) == Approx(0.635 * 10 * std::log10(50.0) + 115 + 0.75).epsilon(1e-12));
  CHECK(path_loss_db(50, 2) == Approx(126.54).epsilon(1e-4));
}

TEST_CASE("path loss table constants") {
  CHECK(kPathLossTable[0].a == 1.77);
  CHECK(kPathLossTable[0].c == 70.0);
  CHECK(kPathLossTable[1].a == 1.71);
  CHECK(kPathLossTable[1].c == 78.6);
  CHECK(kPathLossTable[2].a == 0.635);
  CHECK(kPathLossTable[2].c == 115.0);
  CHECK(kPathLossTable[3].a == 0.362);
  CHECK(kPathLossTable[3].c == 126.0);
  CHECK(path_loss_db(20, 7) == path_loss_db(20, 3));
  CHECK_THROWS_AS(path_loss_db(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(-1, 1), std::invalid_argument);
}

TEST_CASE("path loss matches the hand model on a grid") {
  const double consts[4][2] = {{1.77, 70}, {1.71, 78.6}, {0.635, 115}, {0.362, 126}};
  for (double d : {1.0, 10.0, 20.0, 50.0, 80.0}) {
    for (int k = 0; k < 4; ++k) CHECK(std::abs(path_loss_db(d, k) - reference_pl(d, consts[k][0], consts[k][1])) <= 1e-9);
  }
}

TEST_CASE("path loss grows with every extra blocker on 1..100 m") {
  for (double d = 1.0; d <= 100.0; d += 0.05) {
    for (int k = 0; k < kMaxBlockerClass; ++k) REQUIRE(path_loss_db(d, k) < path_loss_db(d, k + 1));
  }
}

TEST_CASE("link budget arithmetic") {
  CHECK(rx_power_dbm(0, 0, 10, 87.85) == Approx(-77.85));
  CHECK(rx_power_dbm(0, 0, 10, 70.015) == Approx(-60.015));
  CHECK(rx_power_dbm(11.04, 11.04, 10, 100) == Approx(-67.92));
  const auto lb = LinkBudget::evaluate(10, 3, 4, 90);
  CHECK(lb.p_rx_dbm == Approx(lb.g_tx_db + lb.g_rx_db + lb.p_tx_dbm - lb.pl_db));
}

TEST_CASE("noise floor") {
  CHECK(noise_floor_dbm(2.16e9, 10) == Approx(-70.65).epsilon(1e-4));
  CHECK(noise_floor_dbm(1, 0) == Approx(-174.0));
  CHECK(noise_floor_dbm(2.16e9, 0) == Approx(-80.65).epsilon(1e-4));
  CHECK_THROWS(noise_floor_dbm(0, 0));
}

TEST_CASE("mcs table defaults") {
  const auto t = McsTable::defaults();
  CHECK(t.at(0).phy_mode == PhyMode::control);
  CHECK(t.at(0).data_rate_bps == 27'500'000);
  CHECK(t.at(0).sensitivity_dbm == -78);
  CHECK(t.at(13).data_rate_bps == 693'000'000);
  CHECK(t.at(13).sensitivity_dbm == -66);
  for (const auto& e : t.entries()) {
    const double mbps = e.data_rate_bps / 1e6;
    if (e.phy_mode == PhyMode::ofdm) CHECK((mbps >= 693 && mbps <= 6756.75));
    if (e.phy_mode == PhyMode::single_carrier) CHECK((mbps >= 385 && mbps <= 4620));
    // at sensitivity and no interference the SC/OFDM SINR gate is not the binding one
    if (e.phy_mode != PhyMode::control) {
      CHECK(decode_outcome(e.sensitivity_dbm, {}, e, noise_floor_dbm(2.16e9, 10)) == DecodeOutcome::ok);
    }
  }
  CHECK_THROWS_AS(t.at(99), std::out_of_range);
}

TEST_CASE("mcs table parsing") {
  std::istringstream ok("id,phy_mode,rate_mbps,sensitivity_dbm,min_sinr_db\n# control\n0,control,27.5,-78,1\n13,ofdm,693,-66,12\n");
  const auto t = McsTable::parse(ok);
  CHECK(t.entries().size() == 2);
  CHECK(t.at(13).min_sinr_db == 12);
  std::istringstream dup("0,control,27.5,-78,1\n0,control,27.5,-78,1\n");
  CHECK_THROWS_AS(McsTable::parse(dup), std::invalid_argument);
  std::istringstream mode("0,laser,27.5,-78,1\n");
  CHECK_THROWS_AS(McsTable::parse(mode), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(McsTable::parse(empty), std::invalid_argument);
}

TEST_CASE("decode outcomes") {
  McsEntry mcs0{0, PhyMode::control, 27'500'000, -78, 1.0};
  CHECK(decode_outcome(-100, {}, mcs0, -70.65) == DecodeOutcome::fail_sensitivity);
  CHECK(decode_outcome(-60, {}, mcs0, -70.65) == DecodeOutcome::ok);
  CHECK(sinr_db(-60, {}, -70.65) == Approx(10.65));
  const std::vector<double> other{-60.0};
  // both frames of an equal-power pair see SINR <= 0 dB
  CHECK(decode_outcome(-60, other, mcs0, -70.65) == DecodeOutcome::fail_sinr);
  CHECK(sinr_db(-60, other, -70.65) < 0.0);
}

TEST_CASE("decode success is monotone in signal power and interference") {
  const auto t = McsTable::defaults();
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const auto& mcs = t.at(rng.bernoulli(0.5) ? 0 : 13);
    const double p = rng.uniform(-90, -40);
    std::vector<double> intf;
    const int n = static_cast<int>(rng.below(3));
    for (int k = 0; k < n; ++k) intf.push_back(rng.uniform(-90, -50));
    const bool ok = decode_outcome(p, intf, mcs, -70.65) == DecodeOutcome::ok;
    if (ok) {
      REQUIRE(decode_outcome(p + rng.uniform(0, 5), intf, mcs, -70.65) == DecodeOutcome::ok);
      if (!intf.empty()) {
        auto weaker = intf;
        weaker[0] -= rng.uniform(0, 10);
        REQUIRE(decode_outcome(p, weaker, mcs, -70.65) == DecodeOutcome::ok);
      }
    } else {
      auto stronger = intf;
      stronger.push_back(rng.uniform(-90, -50));
      REQUIRE(decode_outcome(p, stronger, mcs, -70.65) != DecodeOutcome::ok);
    }
  }
}

TEST_CASE("frame airtimes") {
  const auto t = McsTable::defaults();
  CHECK(frame_airtime(1600, t.at(13)).ns() == 22'671);
  CHECK(frame_airtime(26, t.at(0)).ns() == 16'664);
  CHECK(std::abs(frame_airtime(1600, t.at(13)).us() - (12800 / 693e6 * 1e6 + 4.2)) < 1e-3);
  CHECK_THROWS(frame_airtime(0, t.at(0)));
}

TEST_CASE("antenna gain at center, edge and opposite side") {
  const auto a = antenna_14(0.3);
  const double half = a.sector_width() / 2;
  for (int s : {0, 5, 13}) {
    const double c = a.sector_center(s);
    CHECK(antenna_gain_db(a, AntennaMode::directional(s), c) == Approx(a.peak_gain_dbi));
    const double edge = half * (1 - 1e-12);
    CHECK(antenna_gain_db(a, AntennaMode::directional(s), c + edge) == Approx(a.peak_gain_dbi - 3.01));
    CHECK(antenna_gain_db(a, AntennaMode::directional(s), c - edge) == Approx(a.peak_gain_dbi - 3.01));
    CHECK(antenna_gain_db(a, AntennaMode::directional(s), c + half * 1.001) == a.sidelobe_gain_dbi);
    CHECK(antenna_gain_db(a, AntennaMode::directional(s), c + std::numbers::pi) == a.sidelobe_gain_dbi);
  }
  CHECK(antenna_gain_db(a, AntennaMode::omni(), 1.234) == a.quasi_omni_gain_dbi);
  CHECK(a.sector_width() == Approx(kTwoPi / 14));
  // clockwise numbering
  CHECK(wrap_pi(a.sector_center(1) - a.sector_center(0)) == Approx(-a.sector_width()));
}

TEST_CASE("conserving peak gain integrates to unity") {
  for (int n : {4, 8, 14, 32}) {
    auto a = antenna_14();
    a.n_sectors = n;
    a.peak_gain_dbi = conserving_peak_gain_dbi(n, -10.0);
    CHECK(a.peak_gain_dbi > a.sidelobe_gain_dbi);
    // midpoint rule on a fine grid, independent of the Simpson rule inside the library
    constexpr int kSteps = 400000;
    double sum = 0.0;
    for (int i = 0; i < kSteps; ++i) {
      sum += std::pow(10.0, antenna_gain_db(a, AntennaMode::directional(0), (i + 0.5) * kTwoPi / kSteps) / 10.0);
    }
    CHECK(sum / kSteps == Approx(1.0).epsilon(1e-4));
  }
  CHECK(conserving_peak_gain_dbi(14, -10.0) == Approx(11.95).epsilon(1e-3));
  CHECK_THROWS(conserving_peak_gain_dbi(1, -10.0));
}

TEST_CASE("the closest sector is the highest-gain sector") {
  Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    const auto a = antenna_14(rng.uniform(0, kTwoPi));
    const double b = rng.uniform(0, kTwoPi);
    const int best = closest_sector(a, b);
    const double g = antenna_gain_db(a, AntennaMode::directional(best), b);
    for (int s = 0; s < a.n_sectors; ++s) REQUIRE(antenna_gain_db(a, AntennaMode::directional(s), b) <= g);
  }
}

TEST_CASE("radio config resolves the peak gain") {
  RadioConfig r;
  CHECK(r.resolved_peak_gain_dbi() == Approx(conserving_peak_gain_dbi(14, -10.0)));
  r.peak_gain_dbi = 15.0;
  CHECK(r.resolved_peak_gain_dbi() == 15.0);
  CHECK(r.antenna(0.5).peak_gain_dbi == 15.0);
  CHECK(r.noise_dbm() == Approx(-70.65).epsilon(1e-4));
}

}  // TEST_SUITE
