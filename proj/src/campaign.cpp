#include "mmv2v/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "mmv2v/mac.hpp"

namespace mmv2v {

void CampaignSpec::validate() const {
  if (bi_slot_sweep.empty() || pcp_prob_sweep.empty()) throw ConfigError("campaign sweeps must not be empty");
  for (int s : bi_slot_sweep) {
    if (s < 3 || s > 8) throw ConfigError("bi_slot_sweep values must lie in 3..8, got " + std::to_string(s));
  }
  for (double p : pcp_prob_sweep) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("pcp_prob_sweep values must lie in (0, 1]");
  }
  if (snapshots_per_cell < 1) throw ConfigError("snapshots_per_cell must be positive");
  if (static_cast<std::uint64_t>(snapshots_per_cell) >= 1'000'000) {
    throw ConfigError("snapshots_per_cell must stay below the per-cell seed stride");
  }
  base.validate();
}

std::vector<Cell> campaign_cells(const CampaignSpec& spec) {
  std::vector<Cell> cells;
  for (double p : spec.pcp_prob_sweep) {
    for (int s : spec.bi_slot_sweep) cells.push_back(Cell{cells.size(), p, s});
  }
  return cells;
}

SimParams cell_params(const CampaignSpec& spec, const Cell& cell) {
  SimParams p = spec.base;
  p.scenario.pcp_probability = cell.pcp_probability;
  p.mac.bi.n_abft_slots = cell.n_abft_slots;
  p.mac.bi.n_sp = cell.n_abft_slots;
  return p;
}

std::uint64_t snapshot_seed(std::uint64_t base_seed, std::size_t cell_index, std::size_t snapshot_index) {
  return base_seed + static_cast<std::uint64_t>(cell_index) * 1'000'000ULL + snapshot_index;
}

SnapshotResult run_snapshot(const CampaignSpec& spec, const Cell& cell, std::size_t snapshot_index, bool keep_trace) {
  const SimParams params = cell_params(spec, cell);
  const std::uint64_t seed = snapshot_seed(spec.base_seed, cell.index, snapshot_index);
  Rng deploy_rng(derive_seed(seed, 0xD3, 0));
  SnapshotResult out;
  try {
    out.scenario = deploy(params.scenario, deploy_rng);
  } catch (const DeploymentError& e) {
    std::ostringstream msg;
    msg << "cell (pcp_prob=" << cell.pcp_probability << ", n_abft=" << cell.n_abft_slots << ") snapshot "
        << snapshot_index << ": " << e.what();
    throw DeploymentError(msg.str());
  }
  SnapshotSimulator sim(out.scenario, params, derive_seed(seed, 0x51, 0));
  sim.run();
  out.metrics = summarize_snapshot(sim.trace(), SummaryConfig::from(params));
  if (keep_trace) out.trace = sim.take_trace();
  return out;
}

namespace {

// Runs job(i) for i in [0, n) on a small pool; the first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

CampaignResult run_campaign(const CampaignSpec& spec) {
  spec.validate();
  const auto cells = campaign_cells(spec);
  const auto per_cell = static_cast<std::size_t>(spec.snapshots_per_cell);
  CampaignResult result;
  result.snapshots.resize(cells.size() * per_cell);
  parallel_for(result.snapshots.size(), spec.threads, [&](std::size_t job) {
    const Cell& cell = cells[job / per_cell];
    result.snapshots[job] = CellSnapshot{cell.pcp_probability, cell.n_abft_slots,
                                         run_snapshot(spec, cell, job % per_cell).metrics};
  });
  result.rows = aggregate(result.snapshots);
  return result;
}

void run_campaign_csv(const CampaignSpec& spec, std::ostream& os) {
  const auto result = run_campaign(spec);
  write_csv(os, result.rows);
  if (!spec.csv_path.empty()) {
    std::ofstream f(spec.csv_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + spec.csv_path);
    write_csv(f, result.rows);
  }
}

std::vector<BenchmarkRow> run_benchmark(const CampaignSpec& spec) {
  spec.validate();
  std::vector<BenchmarkRow> rows;
  for (std::size_t pi = 0; pi < spec.pcp_prob_sweep.size(); ++pi) {
    SimParams p = spec.base;
    p.scenario.pcp_probability = spec.pcp_prob_sweep[pi];
    std::vector<double> samples;
    for (int s = 0; s < spec.snapshots_per_cell; ++s) {
      Rng rng(derive_seed(snapshot_seed(spec.base_seed, pi, static_cast<std::size_t>(s)), 0xBE, 0));
      const Scenario sc = deploy(p.scenario, rng);
      for (int c : ideal_neighbor_counts(sc, p.radio, p.mac.control_mcs)) samples.push_back(c);
    }
    rows.push_back(BenchmarkRow{p.scenario.pcp_probability, MeanCi::of(samples)});
  }
  return rows;
}

MeanCi pooled_benchmark(const CampaignSpec& spec) {
  // Means weighted by sample counts; CI recomputed from pooled moments.
  double n = 0, sum = 0, sum_sq = 0;
  for (const auto& r : run_benchmark(spec)) {
    const double k = static_cast<double>(r.neighbors.n);
    if (k == 0) continue;
    const double sd = k > 1 ? r.neighbors.ci / 1.96 * std::sqrt(k) : 0.0;
    n += k;
    sum += r.neighbors.mean * k;
    sum_sq += sd * sd * (k - 1) + r.neighbors.mean * r.neighbors.mean * k;
  }
  MeanCi out;
  out.n = static_cast<std::size_t>(n);
  if (n == 0) return out;
  out.mean = sum / n;
  if (n > 1) out.ci = 1.96 * std::sqrt(std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1))) / std::sqrt(n);
  return out;
}

// ---------------------------------------------------------------------------
// configuration

namespace {

using Setter = std::function<void(CampaignSpec&, const std::string&)>;

std::string prefix(const std::string& key) { return key.empty() ? std::string() : "key '" + key + "': "; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(prefix(key) + "expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(prefix(key) + "expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const std::uint64_t i = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(prefix(key) + "expected a non-negative integer, got '" + v + "'");
  }
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(parse(key, item)));
  }
  if (out.empty()) throw ConfigError(prefix(key) + "empty list");
  return out;
}

std::map<std::string, Setter> make_setters() {
  std::map<std::string, Setter> m;
  auto num = [](auto get) {
    return [get](CampaignSpec& s, const std::string& v) {
      auto& ref = get(s);
      using T = std::remove_reference_t<decltype(ref)>;
      if constexpr (std::is_floating_point_v<T>) {
        ref = to_double("", v);
      } else {
        ref = static_cast<T>(to_integer("", v));
      }
    };
  };
  auto time_us = [](auto get) {
    return [get](CampaignSpec& s, const std::string& v) { get(s) = SimTime::from_us_real(to_double("", v)); };
  };
  auto time_ms = [](auto get) {
    return [get](CampaignSpec& s, const std::string& v) { get(s) = SimTime::from_us_real(to_double("", v) * 1e3); };
  };

  // scenario
  m["road_length"] = num([](CampaignSpec& s) -> double& { return s.base.scenario.road_length; });
  m["road_width"] = num([](CampaignSpec& s) -> double& { return s.base.scenario.road_width; });
  m["lanes"] = num([](CampaignSpec& s) -> int& { return s.base.scenario.lanes; });
  m["n_vehicles"] = num([](CampaignSpec& s) -> int& { return s.base.scenario.n_vehicles; });
  m["pcp_probability"] = num([](CampaignSpec& s) -> double& { return s.base.scenario.pcp_probability; });
  m["vehicle_length"] = num([](CampaignSpec& s) -> double& { return s.base.scenario.vehicle_length; });
  m["vehicle_width"] = num([](CampaignSpec& s) -> double& { return s.base.scenario.vehicle_width; });
  m["placement_retries"] = num([](CampaignSpec& s) -> int& { return s.base.scenario.placement_retries; });

  // radio
  m["p_tx_dbm"] = num([](CampaignSpec& s) -> double& { return s.base.radio.p_tx_dbm; });
  m["n_sectors"] = num([](CampaignSpec& s) -> int& { return s.base.radio.n_sectors; });
  m["sidelobe_gain_dbi"] = num([](CampaignSpec& s) -> double& { return s.base.radio.sidelobe_gain_dbi; });
  m["quasi_omni_gain_dbi"] = num([](CampaignSpec& s) -> double& { return s.base.radio.quasi_omni_gain_dbi; });
  m["peak_gain_dbi"] = [](CampaignSpec& s, const std::string& v) {
    s.base.radio.peak_gain_dbi = v == "auto" ? std::numeric_limits<double>::quiet_NaN() : to_double("", v);
  };
  m["bandwidth_hz"] = num([](CampaignSpec& s) -> double& { return s.base.radio.bandwidth_hz; });
  m["noise_figure_db"] = num([](CampaignSpec& s) -> double& { return s.base.radio.noise_figure_db; });
  m["mcs_table"] = [](CampaignSpec& s, const std::string& v) { s.base.radio.mcs = McsTable::load(v); };
  m["preamble_control_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.radio.preambles.control; });
  m["preamble_sc_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.radio.preambles.single_carrier; });
  m["preamble_ofdm_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.radio.preambles.ofdm; });

  // beacon interval
  m["bti_tu"] = num([](CampaignSpec& s) -> int& { return s.base.mac.bi.bti_tu; });
  m["abft_slot_tu"] = num([](CampaignSpec& s) -> int& { return s.base.mac.bi.abft_slot_tu; });
  m["n_abft_slots"] = num([](CampaignSpec& s) -> int& { return s.base.mac.bi.n_abft_slots; });
  m["ati_tu"] = num([](CampaignSpec& s) -> int& { return s.base.mac.bi.ati_tu; });
  m["n_sp"] = num([](CampaignSpec& s) -> int& { return s.base.mac.bi.n_sp; });
  m["sp_duration_ms"] = time_ms([](CampaignSpec& s) -> SimTime& { return s.base.mac.bi.sp_duration; });
  m["tu_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.mac.bi.tu; });

  // MAC
  m["control_mcs"] = num([](CampaignSpec& s) -> int& { return s.base.mac.control_mcs; });
  m["data_mcs"] = num([](CampaignSpec& s) -> int& { return s.base.mac.data_mcs; });
  m["sbifs_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.mac.sbifs; });
  m["sifs_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.mac.sifs; });
  m["beacon_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.beacon_bytes; });
  m["ssw_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.ssw_bytes; });
  m["ssw_fbck_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.ssw_fbck_bytes; });
  m["req_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.req_bytes; });
  m["ack_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.ack_bytes; });
  m["data_bytes"] = num([](CampaignSpec& s) -> std::size_t& { return s.base.mac.data_bytes; });
  m["packets_per_sp"] = num([](CampaignSpec& s) -> int& { return s.base.mac.packets_per_sp; });
  m["fbck_tail_fraction"] = num([](CampaignSpec& s) -> double& { return s.base.mac.fbck_tail_fraction; });
  m["lbt_threshold_dbm"] = num([](CampaignSpec& s) -> double& { return s.base.mac.lbt_threshold_dbm; });
  m["lbt_backoff_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.mac.lbt_backoff; });
  m["max_start_jitter_us"] = time_us([](CampaignSpec& s) -> SimTime& { return s.base.mac.max_start_jitter; });
  m["snapshot_duration_s"] = [](CampaignSpec& s, const std::string& v) {
    s.base.snapshot_duration = SimTime::from_us_real(to_double("", v) * 1e6);
  };

  // campaign
  m["bi_slot_sweep"] = [](CampaignSpec& s, const std::string& v) {
    s.bi_slot_sweep = to_list<int>("", v, to_integer);
  };
  m["pcp_prob_sweep"] = [](CampaignSpec& s, const std::string& v) {
    s.pcp_prob_sweep = to_list<double>("", v, to_double);
  };
  m["snapshots_per_cell"] = num([](CampaignSpec& s) -> int& { return s.snapshots_per_cell; });
  m["base_seed"] = [](CampaignSpec& s, const std::string& v) { s.base_seed = to_u64("", v); };
  m["seed"] = m["base_seed"];
  m["threads"] = num([](CampaignSpec& s) -> unsigned& { return s.threads; });
  m["csv_out"] = [](CampaignSpec& s, const std::string& v) { s.csv_path = v; };
  m["trace_out"] = [](CampaignSpec& s, const std::string& v) { s.trace_path = v; };
  return m;
}

const std::map<std::string, Setter>& setters() {
  static const auto m = make_setters();
  return m;
}

// mcs.<id>.sensitivity_dbm / mcs.<id>.min_sinr_db / mcs.<id>.rate_mbps
bool apply_mcs_entry(CampaignSpec& spec, const std::string& key, const std::string& value) {
  if (key.rfind("mcs.", 0) != 0) return false;
  const auto dot = key.find('.', 4);
  if (dot == std::string::npos) return false;
  const auto id = static_cast<int>(to_integer(key, key.substr(4, dot - 4)));
  const std::string field = key.substr(dot + 1);
  if (!spec.base.radio.mcs.contains(id)) throw ConfigError("key '" + key + "': unknown MCS " + std::to_string(id));
  McsEntry& e = spec.base.radio.mcs.at(id);
  if (field == "sensitivity_dbm") {
    e.sensitivity_dbm = to_double(key, value);
  } else if (field == "min_sinr_db") {
    e.min_sinr_db = to_double(key, value);
  } else if (field == "rate_mbps") {
    e.data_rate_bps = static_cast<std::uint64_t>(std::llround(to_double(key, value) * 1e6));
  } else {
    return false;
  }
  return true;
}

}  // namespace

void apply_config_entry(CampaignSpec& spec, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it != setters().end()) {
    try {
      it->second(spec, value);
    } catch (const ConfigError& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
    return;
  }
  if (apply_mcs_entry(spec, key, value)) return;
  throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config(CampaignSpec& spec, std::istream& is, const std::string& origin) {
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_config_entry(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(CampaignSpec& spec, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  apply_config(spec, f, path);
}

const std::vector<std::string>& config_keys() {
  static const auto keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    k.push_back("mcs.<id>.sensitivity_dbm");
    k.push_back("mcs.<id>.min_sinr_db");
    k.push_back("mcs.<id>.rate_mbps");
    return k;
  }();
  return keys;
}

}  // namespace mmv2v
