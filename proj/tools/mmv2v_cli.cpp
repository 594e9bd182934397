// mmv2v command-line driver: single snapshot, full sweep, ideal benchmark.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmv2v/campaign.hpp"

namespace {

using namespace mmv2v;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;  // key=value
  std::optional<int> snapshots;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Base seed (overrides the config file)");
  app->add_option("--out", c.out, "Output path");
  app->add_option("--set", c.overrides, "Extra key=value overrides, applied after --config");
  app->add_option("--snapshots", c.snapshots, "Snapshots per cell");
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

CampaignSpec load_spec(const Common& c) {
  CampaignSpec spec;
  if (!c.config.empty()) apply_config_file(spec, c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_entry(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) spec.base_seed = *c.seed;
  if (c.snapshots) spec.snapshots_per_cell = *c.snapshots;
  if (c.threads) spec.threads = *c.threads;
  return spec;
}

nlohmann::json to_json(const SnapshotResult& r, const SimParams& p) {
  nlohmann::json j;
  j["n_stations"] = r.scenario.size();
  j["bhi_ms"] = p.mac.bi.bhi().ms();
  j["bi_ms"] = p.mac.bi.bi().ms();
  auto& pcps = j["pcps"] = nlohmann::json::array();
  for (const auto& m : r.metrics.pcps) {
    nlohmann::json e;
    e["pcp"] = m.pcp;
    e["n_bis"] = m.n_bis;
    e["n_beacon_responders"] = m.first_bi.beacon_responders;
    e["n_fbck_responders"] = m.first_bi.fbck_responders;
    e["n_acks"] = m.first_bi.acks;
    e["delay_first_sp_ms"] = m.delay_first_sp_ms ? nlohmann::json(*m.delay_first_sp_ms) : nlohmann::json();
    e["allocated_sps"] = m.allocated_sps;
    e["delivered"] = m.delivered;
    e["normalized_pdr"] = m.normalized_pdr;
    e["allocated_sp_pdr"] = m.allocated_sp_pdr ? nlohmann::json(*m.allocated_sp_pdr) : nlohmann::json();
    pcps.push_back(std::move(e));
  }
  j["concurrency"] = r.metrics.concurrency;
  return j;
}

int cmd_run(const Common& c, double prob, int slots, std::size_t index, const std::string& trace_path) {
  CampaignSpec spec = load_spec(c);
  spec.pcp_prob_sweep = {prob};
  spec.bi_slot_sweep = {slots};
  spec.validate();
  const Cell cell{0, prob, slots};
  const std::string trace_out = trace_path.empty() ? spec.trace_path : trace_path;
  const auto result = run_snapshot(spec, cell, index, !trace_out.empty());
  const auto j = to_json(result, cell_params(spec, cell));
  if (c.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(c.out);
    if (!f) throw ConfigError("cannot write " + c.out);
    f << j.dump(2) << '\n';
  }
  if (!trace_out.empty()) {
    std::ofstream f(trace_out);
    if (!f) throw ConfigError("cannot write " + trace_out);
    write_trace(f, *result.trace);
  }
  return 0;
}

int cmd_sweep(const Common& c) {
  CampaignSpec spec = load_spec(c);
  if (!c.out.empty()) spec.csv_path = c.out;
  if (spec.csv_path.empty()) {
    run_campaign_csv(spec, std::cout);
  } else {
    std::ostream null_stream(nullptr);
    run_campaign_csv(spec, null_stream);
    std::cerr << "wrote " << spec.csv_path << '\n';
  }
  return 0;
}

int cmd_bench(const Common& c) {
  const CampaignSpec spec = load_spec(c);
  std::ofstream file;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw ConfigError("cannot write " + c.out);
  }
  std::ostream& os = c.out.empty() ? std::cout : file;
  os << "pcp_prob,neighbors_mean,neighbors_ci,n_pcps\n";
  char line[128];
  for (const auto& r : run_benchmark(spec)) {
    std::snprintf(line, sizeof line, "%.2f,%.4f,%.4f,%zu\n", r.pcp_probability, r.neighbors.mean, r.neighbors.ci,
                  r.neighbors.n);
    os << line;
  }
  const MeanCi all = pooled_benchmark(spec);
  std::snprintf(line, sizeof line, "all,%.4f,%.4f,%zu\n", all.mean, all.ci, all.n);
  os << line;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave 802.11ad V2V snapshot simulator"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, bench_opts;
  double prob = 0.1;
  int slots = 4;
  std::size_t index = 0;
  std::string trace_path;
  bool list_keys = false;

  auto* run = app.add_subcommand("run", "Simulate one snapshot and print its metrics as JSON");
  add_common(run, run_opts);
  run->add_option("--pcp-prob", prob, "PCP probability")->check(CLI::Range(0.0, 1.0));
  run->add_option("--slots", slots, "A-BFT slots (also the SP count)")->check(CLI::Range(3, 8));
  run->add_option("--index", index, "Snapshot index within the cell");
  run->add_option("--trace", trace_path, "Write the event trace here");

  auto* sweep = app.add_subcommand("sweep", "Run the campaign grid and write the CSV");
  add_common(sweep, sweep_opts);

  auto* bench = app.add_subcommand("bench", "Ideal-MAC reachable neighbor benchmark");
  add_common(bench, bench_opts);

  auto* keys = app.add_subcommand("keys", "List configuration keys");
  keys->callback([&] { list_keys = true; });

  CLI11_PARSE(app, argc, argv);
  try {
    if (list_keys) {
      for (const auto& k : config_keys()) std::cout << k << '\n';
      return 0;
    }
    if (*run) return cmd_run(run_opts, prob, slots, index, trace_path);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*bench) return cmd_bench(bench_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
