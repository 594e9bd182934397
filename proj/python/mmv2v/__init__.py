"""IEEE 802.11ad V2V snapshot simulator."""

from ._core import (
    ConfigError,
    DeploymentError,
    MetricsError,
    benchmark,
    bhi_ns,
    config_keys,
    conserving_peak_gain_dbi,
    deploy,
    frame_airtime_ns,
    noise_floor_dbm,
    path_loss_db,
    run_campaign_csv,
    run_snapshot,
    rx_power_dbm,
)

CSV_COLUMNS = (
    "pcp_prob", "n_abft", "n_snapshots",
    "beacons_mean", "beacons_ci", "fbck_mean", "fbck_ci", "acks_mean", "acks_ci",
    "delay_ms_mean", "delay_ms_ci", "npdr_mean", "npdr_ci", "alloc_pdr_mean",
    "conc0", "conc2", "conc3", "conc4",
)


def _stringify(config):
    return {str(k): ",".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v) for k, v in (config or {}).items()}


def campaign(config=None, seed=None):
    """Run a sweep and return the CSV rows as a list of dicts (numeric values)."""
    text = run_campaign_csv(_stringify(config), seed)
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        vals = line.split(",")
        rows.append({k: (int(v) if k in ("n_abft", "n_snapshots") else float(v)) for k, v in zip(header, vals)})
    return rows


__all__ = [
    "CSV_COLUMNS", "ConfigError", "DeploymentError", "MetricsError", "benchmark", "bhi_ns", "campaign",
    "config_keys", "conserving_peak_gain_dbi", "deploy", "frame_airtime_ns", "noise_floor_dbm",
    "path_loss_db", "run_campaign_csv", "run_snapshot", "rx_power_dbm",
]
