//! Output emission: one CSV per experiment plus a reproducibility manifest.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that parsing
//! the CSV back recovers every value bit for bit; re-running a command with
//! the same configuration therefore produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use irslink::simkit::ExperimentResult;
use serde::Serialize;

/// Fixed CSV column order; every experiment writes the same schema.
pub const CSV_HEADER: &str = "sweep,scheme,metric,value,trials,errors,stderr";

/// Reproducibility sidecar written next to every CSV.
#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'a str,
    subcommand: &'a str,
    seed: u64,
    config_hash: &'a str,
    sweep_variable: &'a str,
    files: Vec<String>,
}

/// Formats one record as a CSV line.
fn csv_line(
    sweep: f64,
    scheme: &str,
    metric: &str,
    value: f64,
    trials: u64,
    errors: u64,
    stderr: f64,
) -> String {
    format!("{sweep:.16e},{scheme},{metric},{value:.16e},{trials},{errors},{stderr:.16e}")
}

/// Writes `<name>.csv` and `manifest.json` into `out_dir`, creating the
/// directory if needed. Returns the paths written, for reporting.
pub fn emit(
    out_dir: &Path,
    name: &str,
    result: &ExperimentResult,
    tool_version: &str,
) -> Result<Vec<PathBuf>, String> {
    let fail = |what: &str, e: std::io::Error| format!("{what}: {e}");
    fs::create_dir_all(out_dir).map_err(|e| fail(&out_dir.display().to_string(), e))?;

    let csv_name = format!("{name}.csv");
    let csv_path = out_dir.join(&csv_name);
    let mut csv = String::with_capacity(64 * (result.records.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for r in &result.records {
        csv.push_str(&csv_line(
            r.sweep_value,
            &r.scheme,
            &r.metric,
            r.value,
            r.trials,
            r.errors,
            r.std_error,
        ));
        csv.push('\n');
    }
    fs::write(&csv_path, csv).map_err(|e| fail(&csv_path.display().to_string(), e))?;

    let manifest = Manifest {
        tool_version,
        subcommand: name,
        seed: result.seed,
        config_hash: &result.config_hash,
        sweep_variable: &result.sweep_variable,
        files: vec![csv_name],
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format!("manifest serialization: {e}"))?;
    json.push('\n');
    fs::write(&manifest_path, json)
        .map_err(|e| fail(&manifest_path.display().to_string(), e))?;

    Ok(vec![csv_path, manifest_path])
}

/// Prints the plotting helper to any writer (stdout in practice).
pub fn write_plot_script(mut w: impl std::io::Write) -> std::io::Result<()> {
    w.write_all(PLOT_SCRIPT.as_bytes())
}

/// Self-contained matplotlib script that turns the emitted CSVs into
/// figures. Kept as text so the binary has no Python dependency itself.
pub const PLOT_SCRIPT: &str = r##"#!/usr/bin/env python3
"""Plot CSV files produced by the irslink CLI.

Usage:
    python3 plot.py ser-vs-power.csv [gain-vs-elements.csv ...]

Each input produces a PNG next to the CSV with the same stem. The file stem
selects sensible axes: SER plots use a log y-axis over dBm, gain plots are
log-log, and rate plots are linear.
"""
import csv
import math
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

X_LABELS = {
    "ser-vs-power": "transmit power (dBm)",
    "ser-vs-elements": "elements per side",
    "gain-vs-elements": "elements per side",
    "gain-vs-distance": "user distance (m)",
    "rate-vs-coherence": "coherence interval (symbols)",
}


def load_series(path):
    """Group rows by (scheme, metric) and sort each series by sweep value."""
    series = defaultdict(list)
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            key = (row["scheme"], row["metric"])
            series[key].append((float(row["sweep"]), float(row["value"])))
    for points in series.values():
        points.sort()
    return series


def plot_file(path):
    stem = Path(path).stem
    series = load_series(path)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    to_dbm = stem == "ser-vs-power"
    for (scheme, metric), points in sorted(series.items()):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        if to_dbm:
            xs = [10.0 * math.log10(x) for x in xs]
        # Simulated curves get markers; analytic overlays get dashes.
        simulated = metric.endswith("_mc") or metric == "rate"
        style = "-o" if simulated else "--"
        ax.plot(xs, ys, style, label=f"{scheme}/{metric}", markersize=4)
    if stem.startswith("ser"):
        ax.set_yscale("log")
        ax.set_ylabel("symbol error rate")
    elif stem.startswith("gain"):
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_ylabel("gain (linear)")
    else:
        ax.set_ylabel("effective rate (bit/s/Hz)")
    ax.set_xlabel(X_LABELS.get(stem, "sweep"))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path).with_suffix(".png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print(f"saved {out}")


def main(argv):
    if len(argv) < 2:
        sys.exit(__doc__)
    for path in argv[1:]:
        plot_file(path)


if __name__ == "__main__":
    main(sys.argv)
"##;
