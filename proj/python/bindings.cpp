// Python bindings: link budget helpers, single snapshots, campaign CSV and the
// ideal benchmark. Results come back as plain dicts/lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mmv2v/campaign.hpp"

namespace py = pybind11;
using namespace mmv2v;

namespace {

CampaignSpec make_spec(const std::map<std::string, std::string>& config, std::optional<std::uint64_t> seed) {
  CampaignSpec spec;
  for (const auto& [k, v] : config) apply_config_entry(spec, k, v);
  if (seed) spec.base_seed = *seed;
  return spec;
}

py::dict pcp_dict(const PcpMetrics& m) {
  py::dict d;
  d["pcp"] = m.pcp;
  d["n_bis"] = m.n_bis;
  d["n_beacon_responders"] = m.first_bi.beacon_responders;
  d["n_fbck_responders"] = m.first_bi.fbck_responders;
  d["n_acks"] = m.first_bi.acks;
  d["delay_first_sp_ms"] = m.delay_first_sp_ms ? py::cast(*m.delay_first_sp_ms) : py::none();
  d["potential_sps"] = m.potential_sps;
  d["allocated_sps"] = m.allocated_sps;
  d["delivered"] = m.delivered;
  d["normalized_pdr"] = m.normalized_pdr;
  d["allocated_sp_pdr"] = m.allocated_sp_pdr ? py::cast(*m.allocated_sp_pdr) : py::none();
  py::list per_bi;
  for (const auto& h : m.per_bi) per_bi.append(py::make_tuple(h.beacon_responders, h.fbck_responders, h.acks, h.reqs));
  d["per_bi"] = per_bi;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "802.11ad V2V snapshot simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DeploymentError>(m, "DeploymentError", PyExc_RuntimeError);
  py::register_exception<MetricsError>(m, "MetricsError", PyExc_RuntimeError);

  m.def("path_loss_db", &path_loss_db, py::arg("distance_m"), py::arg("n_blockers"));
  m.def("rx_power_dbm", &rx_power_dbm, py::arg("tx_gain_db"), py::arg("rx_gain_db"), py::arg("p_tx_dbm"),
        py::arg("path_loss_db"));
  m.def("noise_floor_dbm", &noise_floor_dbm, py::arg("bandwidth_hz"), py::arg("noise_figure_db"));
  m.def("conserving_peak_gain_dbi", &conserving_peak_gain_dbi, py::arg("n_sectors") = 14,
        py::arg("sidelobe_gain_dbi") = -10.0);
  m.def(
      "frame_airtime_ns",
      [](std::size_t bytes, int mcs) { return frame_airtime(bytes, McsTable::defaults().at(mcs)).ns(); },
      py::arg("payload_bytes"), py::arg("mcs"));
  m.def(
      "bhi_ns",
      [](int n_abft_slots) {
        BiConfig bi;
        bi.n_abft_slots = n_abft_slots;
        return bi.bhi().ns();
      },
      py::arg("n_abft_slots"));

  m.def("config_keys", &config_keys);

  m.def(
      "deploy",
      [](std::uint64_t seed, const std::map<std::string, std::string>& config) {
        const auto spec = make_spec(config, std::nullopt);
        Rng rng(seed);
        const auto s = deploy(spec.base.scenario, rng);
        py::list out;
        for (const auto& v : s.vehicles) out.append(py::make_tuple(v.lane, v.center.x, v.center.y, bool(s.is_pcp[v.id])));
        return out;
      },
      py::arg("seed"), py::arg("config") = std::map<std::string, std::string>{},
      "Random highway snapshot as (lane, x, y, is_pcp) tuples.");

  m.def(
      "run_snapshot",
      [](double pcp_prob, int slots, std::size_t index, std::uint64_t seed,
         const std::map<std::string, std::string>& config, bool trace) {
        auto spec = make_spec(config, seed);
        spec.pcp_prob_sweep = {pcp_prob};
        spec.bi_slot_sweep = {slots};
        spec.validate();
        SnapshotResult r;
        {
          py::gil_scoped_release release;
          r = run_snapshot(spec, Cell{0, pcp_prob, slots}, index, trace);
        }
        py::dict d;
        py::list pcps;
        for (const auto& p : r.metrics.pcps) pcps.append(pcp_dict(p));
        d["n_stations"] = r.scenario.size();
        d["pcps"] = pcps;
        d["concurrency"] = r.metrics.concurrency;
        if (r.trace) {
          std::ostringstream os;
          write_trace(os, *r.trace);
          d["trace"] = os.str();
        }
        return d;
      },
      py::arg("pcp_prob") = 0.1, py::arg("slots") = 4, py::arg("index") = 0, py::arg("seed") = 1,
      py::arg("config") = std::map<std::string, std::string>{}, py::arg("trace") = false,
      "Simulate one snapshot; metrics as a dict (optionally with the text trace).");

  m.def(
      "run_campaign_csv",
      [](const std::map<std::string, std::string>& config, std::optional<std::uint64_t> seed) {
        const auto spec = make_spec(config, seed);
        std::ostringstream os;
        {
          py::gil_scoped_release release;
          run_campaign_csv(spec, os);
        }
        return os.str();
      },
      py::arg("config") = std::map<std::string, std::string>{}, py::arg("seed") = py::none(),
      "Run the sweep described by `config` (flat keys) and return the CSV text.");

  m.def(
      "benchmark",
      [](const std::map<std::string, std::string>& config, std::optional<std::uint64_t> seed) {
        const auto spec = make_spec(config, seed);
        MeanCi r;
        {
          py::gil_scoped_release release;
          r = pooled_benchmark(spec);
        }
        return py::make_tuple(r.mean, r.ci, r.n);
      },
      py::arg("config") = std::map<std::string, std::string>{}, py::arg("seed") = py::none(),
      "Ideal-MAC reachable neighbors pooled over the probability sweep: (mean, ci95, n).");
}
