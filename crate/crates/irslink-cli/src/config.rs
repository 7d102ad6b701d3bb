//! Layered configuration resolution for the `irslink` binary.
//!
//! A run's configuration is assembled in four layers, each overriding the
//! previous one key by key:
//!
//! 1. a named preset supplies a complete default scenario,
//! 2. an optional plain-text config file (`--config`) overrides it,
//! 3. repeated `--set key=value` flags apply in command-line order,
//! 4. the dedicated flags `--seed`, `--schemes`, and `--sweep` land last.
//!
//! The fully resolved state is serialized to canonical JSON and hashed with
//! SHA-256, so every output file can name the exact configuration that
//! produced it. Power-like values accept `dB`/`dBm` suffixes (both map
//! through 10^(v/10)); bare numbers are linear. All engine-facing values are
//! linear milliwatts, meters, and counts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use irslink::channel::{self, IrsGeometry, SystemParams};
use irslink::simkit::{MonteCarloBudget, RunSpec};
use irslink::stc::Scheme;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hard cap on generated sweep grids; a range producing more points than
/// this is almost certainly a units mistake (e.g. a dBm step applied in mW).
const MAX_SWEEP_POINTS: usize = 10_000;

/// The experiments the binary can run. Each data-producing experiment owns
/// one sweep variable; `Validate` and `PlotScript` take no sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SerVsPower,
    SerVsElements,
    GainVsElements,
    GainVsDistance,
    RateVsCoherence,
    Validate,
    PlotScript,
}

/// How sweep values for a variable are parsed and stepped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepKind {
    /// Positive power; accepts dB/dBm suffixes, ranges step in the written
    /// domain (so `20dBm:30dBm:2dBm` yields six log-spaced mW values).
    Power,
    /// Positive integer (surface edge size or symbol periods).
    Count,
    /// Positive linear length in meters; no suffixes.
    Length,
}

impl Experiment {
    /// Kebab-case name used for subcommand matching, file stems, and errors.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SerVsPower => "ser-vs-power",
            Experiment::SerVsElements => "ser-vs-elements",
            Experiment::GainVsElements => "gain-vs-elements",
            Experiment::GainVsDistance => "gain-vs-distance",
            Experiment::RateVsCoherence => "rate-vs-coherence",
            Experiment::Validate => "validate",
            Experiment::PlotScript => "plot-script",
        }
    }

    /// The sweep variable this experiment accepts, if any.
    fn sweep_plan(self) -> Option<(&'static str, SweepKind)> {
        match self {
            Experiment::SerVsPower => Some(("tx_power", SweepKind::Power)),
            Experiment::SerVsElements | Experiment::GainVsElements => {
                Some(("n_bar", SweepKind::Count))
            }
            Experiment::GainVsDistance => Some(("user2_distance", SweepKind::Length)),
            Experiment::RateVsCoherence => Some(("coherence_interval", SweepKind::Count)),
            Experiment::Validate | Experiment::PlotScript => None,
        }
    }

    /// Default grid used when `--sweep` is absent, in engine units.
    fn default_sweep(self) -> Vec<f64> {
        match self {
            // 20..30 dBm in 2 dB steps, converted to mW.
            Experiment::SerVsPower => (0..=5)
                .map(|k| from_decibels(20.0 + 2.0 * k as f64))
                .collect(),
            Experiment::SerVsElements => vec![5.0, 25.0, 45.0, 65.0, 85.0, 105.0],
            Experiment::GainVsElements => vec![5.0, 15.0, 55.0, 105.0, 205.0, 305.0],
            Experiment::GainVsDistance => (1..=8).map(|k| 50.0 * k as f64).collect(),
            Experiment::RateVsCoherence => vec![
                10.0, 50.0, 100.0, 102.0, 150.0, 200.0, 250.0, 300.0, 500.0, 1000.0,
            ],
            Experiment::Validate | Experiment::PlotScript => Vec::new(),
        }
    }
}

/// 10^(v/10): shared mapping for both dB (ratios) and dBm (mW) suffixes.
fn from_decibels(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

/// Numeric domain a written value was expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Domain {
    Linear,
    Decibel,
}

/// Parses a number with an optional case-insensitive `dB`/`dBm` suffix,
/// reporting which domain it was written in. Bare numbers are linear.
fn parse_suffixed(text: &str) -> Result<(f64, Domain), String> {
    let trimmed = text.trim();
    let lower = trimmed.to_ascii_lowercase();
    let (num, domain) = if let Some(stripped) = lower.strip_suffix("dbm") {
        (stripped, Domain::Decibel)
    } else if let Some(stripped) = lower.strip_suffix("db") {
        (stripped, Domain::Decibel)
    } else {
        (lower.as_str(), Domain::Linear)
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{trimmed}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{trimmed}' is not finite"));
    }
    Ok((value, domain))
}

/// Power-like value: suffix allowed, result in linear units.
fn parse_power(text: &str) -> Result<f64, String> {
    let (v, domain) = parse_suffixed(text)?;
    Ok(match domain {
        Domain::Linear => v,
        Domain::Decibel => from_decibels(v),
    })
}

/// Plain linear value: a dB/dBm suffix is rejected to catch unit mistakes.
fn parse_linear(text: &str) -> Result<f64, String> {
    let (v, domain) = parse_suffixed(text)?;
    if domain == Domain::Decibel {
        return Err(format!("'{}' takes no dB/dBm suffix here", text.trim()));
    }
    Ok(v)
}

fn parse_usize(text: &str) -> Result<usize, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("'{}' is not a non-negative integer", text.trim()))
}

fn parse_u64(text: &str) -> Result<u64, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("'{}' is not a non-negative integer", text.trim()))
}

/// Config file sections; every key belongs to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Geometry,
    System,
    Run,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Geometry => "geometry",
            Section::System => "system",
            Section::Run => "run",
        }
    }

    fn parse(name: &str) -> Option<Section> {
        match name {
            "geometry" => Some(Section::Geometry),
            "system" => Some(Section::System),
            "run" => Some(Section::Run),
            _ => None,
        }
    }
}

/// Every accepted key and the section it belongs to. Pseudo-keys (`n_bar`,
/// `tx_power`, `user1_distance`) fan out to two concrete fields each.
const KEYS: &[(&str, Section)] = &[
    ("n_y", Section::Geometry),
    ("n_z", Section::Geometry),
    ("n_bar", Section::Geometry),
    ("spacing", Section::Geometry),
    ("element_area", Section::Geometry),
    ("ap_distance", Section::Geometry),
    ("wavelength", Section::System),
    ("tx_power_user1", Section::System),
    ("tx_power_user2", Section::System),
    ("tx_power", Section::System),
    ("noise_power", Section::System),
    ("ref_path_gain", Section::System),
    ("path_loss_exp", Section::System),
    ("d_h1", Section::System),
    ("d_g1", Section::System),
    ("user1_distance", Section::System),
    ("user2_distance", Section::System),
    ("user2_antenna_area", Section::System),
    ("psk_order", Section::System),
    ("seed", Section::Run),
    ("target_errors", Section::Run),
    ("max_pairs", Section::Run),
    ("schemes", Section::Run),
    ("sweep", Section::Run),
];

fn key_section(key: &str) -> Option<Section> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
}

/// Mutable accumulation state while layers are applied.
#[derive(Debug, Clone)]
struct Builder {
    n_y: usize,
    n_z: usize,
    spacing: f64,
    element_area: f64,
    ap_distance: f64,
    wavelength: f64,
    tx_power_user1: f64,
    tx_power_user2: f64,
    noise_power: f64,
    ref_path_gain: f64,
    path_loss_exp: f64,
    d_h1: f64,
    d_g1: f64,
    user2_distance: f64,
    user2_antenna_area: f64,
    psk_order: usize,
    seed: u64,
    target_errors: u64,
    max_pairs: u64,
    schemes_raw: String,
    sweep_raw: Option<String>,
}

/// The built-in preset names accepted by `--preset`.
pub const PRESETS: &[&str] = &["paper-default"];

/// Complete default scenario for a preset name.
fn preset_base(name: &str) -> Result<Builder, String> {
    match name {
        // Reference scenario: 105×105 half-wavelength surface 0.5 m from
        // the AP, fully occupied elements, 80 m fading links, −30 dB path
        // gain at 1 m, −85 dBm noise, 30 dBm per user, 8-PSK.
        "paper-default" => Ok(Builder {
            n_y: 105,
            n_z: 105,
            spacing: 0.025,
            element_area: 0.025 * 0.025,
            ap_distance: 0.5,
            wavelength: 0.05,
            tx_power_user1: from_decibels(30.0),
            tx_power_user2: from_decibels(30.0),
            noise_power: from_decibels(-85.0),
            ref_path_gain: from_decibels(-30.0),
            path_loss_exp: 3.0,
            d_h1: 80.0,
            d_g1: 80.0,
            user2_distance: 50.0,
            user2_antenna_area: 0.025 * 0.025,
            psk_order: 8,
            seed: 1,
            target_errors: 200,
            max_pairs: 20_000_000,
            schemes_raw: "proposed,siso,dumb_irs,classic_alamouti,irs_alamouti".to_string(),
            sweep_raw: None,
        }),
        other => Err(format!(
            "unknown preset '{other}' (available: {})",
            PRESETS.join(", ")
        )),
    }
}

/// Applies one `key=value` entry to the builder. `ctx` names the source
/// (file position or flag) and prefixes every error.
fn apply_entry(b: &mut Builder, key: &str, value: &str, ctx: &str) -> Result<(), String> {
    let err = |e: String| format!("{ctx}: {e}");
    match key {
        "n_y" => b.n_y = parse_usize(value).map_err(err)?,
        "n_z" => b.n_z = parse_usize(value).map_err(err)?,
        "n_bar" => {
            let n = parse_usize(value).map_err(err)?;
            b.n_y = n;
            b.n_z = n;
        }
        "spacing" => b.spacing = parse_linear(value).map_err(err)?,
        "element_area" => b.element_area = parse_linear(value).map_err(err)?,
        "ap_distance" => b.ap_distance = parse_linear(value).map_err(err)?,
        "wavelength" => b.wavelength = parse_linear(value).map_err(err)?,
        "tx_power_user1" => b.tx_power_user1 = parse_power(value).map_err(err)?,
        "tx_power_user2" => b.tx_power_user2 = parse_power(value).map_err(err)?,
        "tx_power" => {
            let p = parse_power(value).map_err(err)?;
            b.tx_power_user1 = p;
            b.tx_power_user2 = p;
        }
        "noise_power" => b.noise_power = parse_power(value).map_err(err)?,
        "ref_path_gain" => b.ref_path_gain = parse_power(value).map_err(err)?,
        "path_loss_exp" => b.path_loss_exp = parse_linear(value).map_err(err)?,
        "d_h1" => b.d_h1 = parse_linear(value).map_err(err)?,
        "d_g1" => b.d_g1 = parse_linear(value).map_err(err)?,
        "user1_distance" => {
            let d = parse_linear(value).map_err(err)?;
            b.d_h1 = d;
            b.d_g1 = d;
        }
        "user2_distance" => b.user2_distance = parse_linear(value).map_err(err)?,
        "user2_antenna_area" => b.user2_antenna_area = parse_linear(value).map_err(err)?,
        "psk_order" => b.psk_order = parse_usize(value).map_err(err)?,
        "seed" => b.seed = parse_u64(value).map_err(err)?,
        "target_errors" => b.target_errors = parse_u64(value).map_err(err)?,
        "max_pairs" => b.max_pairs = parse_u64(value).map_err(err)?,
        "schemes" => b.schemes_raw = value.trim().to_string(),
        "sweep" => b.sweep_raw = Some(value.trim().to_string()),
        other => return Err(format!("{ctx}: unknown key '{other}'")),
    }
    Ok(())
}

/// One `key = value` line from a config file with its provenance.
#[derive(Debug)]
struct FileEntry {
    key: String,
    value: String,
    line: usize,
}

/// Parses the sectioned `key = value` config format.
///
/// `#` and `;` start comments; blank lines are skipped; `[geometry]`,
/// `[system]`, and `[run]` headers scope the keys that follow. Unknown keys,
/// keys in the wrong section, keys before any header, and duplicate keys are
/// all rejected with the offending line number.
fn parse_file(text: &str, label: &str) -> Result<Vec<FileEntry>, String> {
    let mut entries = Vec::new();
    let mut section: Option<Section> = None;
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find(['#', ';']) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| format!("{label}:{line_no}: unterminated section header"))?
                .trim();
            section = Some(Section::parse(name).ok_or_else(|| {
                format!("{label}:{line_no}: unknown section '[{name}]' (expected [geometry], [system], or [run])")
            })?);
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{label}:{line_no}: expected 'key = value'"))?;
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        let home = key_section(&key)
            .ok_or_else(|| format!("{label}:{line_no}: unknown key '{key}'"))?;
        let current = section
            .ok_or_else(|| format!("{label}:{line_no}: key '{key}' appears before any [section] header"))?;
        if home != current {
            return Err(format!(
                "{label}:{line_no}: key '{key}' belongs to [{}], not [{}]",
                home.name(),
                current.name()
            ));
        }
        if let Some(first) = seen.insert(key.clone(), line_no) {
            return Err(format!(
                "{label}:{line_no}: duplicate key '{key}' (first set on line {first})"
            ));
        }
        entries.push(FileEntry { key, value, line: line_no });
    }
    Ok(entries)
}

/// Splits and validates a comma-separated scheme list into canonical tags.
fn parse_schemes(raw: &str) -> Result<Vec<String>, String> {
    let mut tags = Vec::new();
    for part in raw.split(',') {
        let tag = part.trim();
        if tag.is_empty() {
            return Err("scheme list contains an empty entry".to_string());
        }
        let scheme = Scheme::parse(tag).map_err(|_| {
            format!(
                "unknown scheme '{tag}' (available: {})",
                Scheme::ALL.map(|s| s.tag()).join(", ")
            )
        })?;
        let canonical = scheme.tag().to_string();
        if tags.contains(&canonical) {
            return Err(format!("scheme '{canonical}' listed twice"));
        }
        tags.push(canonical);
    }
    if tags.is_empty() {
        return Err("scheme list is empty".to_string());
    }
    Ok(tags)
}

/// Parses one sweep endpoint/element for the given kind.
fn parse_sweep_value(text: &str, kind: SweepKind) -> Result<(f64, Domain), String> {
    match kind {
        SweepKind::Power => parse_suffixed(text),
        SweepKind::Length => Ok((parse_linear(text)?, Domain::Linear)),
        SweepKind::Count => {
            let n = parse_u64(text)?;
            if n == 0 {
                return Err(format!("'{}' must be at least 1", text.trim()));
            }
            Ok((n as f64, Domain::Linear))
        }
    }
}

/// Parses a sweep specification `var=start:stop:step` or `var=v1,v2,...`.
///
/// Range endpoints and step must share one domain (all dB/dBm or all
/// linear); the grid is generated by counting steps in that domain and only
/// then converted to engine units, so a dB step yields log-spaced powers.
fn parse_sweep(raw: &str, var: &'static str, kind: SweepKind) -> Result<Vec<f64>, String> {
    let (name, spec) = raw
        .split_once('=')
        .ok_or_else(|| format!("sweep '{raw}' is not of the form {var}=start:stop:step"))?;
    let name = name.trim();
    if name != var {
        return Err(format!(
            "this experiment sweeps '{var}', not '{name}'"
        ));
    }
    let spec = spec.trim();
    let to_engine = |v: f64, d: Domain| match (kind, d) {
        (SweepKind::Power, Domain::Decibel) => from_decibels(v),
        _ => v,
    };
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range '{spec}' must have exactly start:stop:step"));
        }
        let (start, d0) = parse_sweep_value(parts[0], kind)?;
        let (stop, d1) = parse_sweep_value(parts[1], kind)?;
        let (step, d2) = parse_sweep_value(parts[2], kind)?;
        if d0 != d1 || d0 != d2 {
            return Err(format!(
                "range '{spec}' mixes dB-suffixed and linear values"
            ));
        }
        if !(step > 0.0) {
            return Err(format!("range step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("range '{spec}' runs backwards (stop < start)"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > MAX_SWEEP_POINTS {
            return Err(format!(
                "range '{spec}' produces {count} points (limit {MAX_SWEEP_POINTS})"
            ));
        }
        (0..count)
            .map(|k| to_engine(start + step * k as f64, d0))
            .collect()
    } else {
        spec.split(',')
            .map(|part| parse_sweep_value(part, kind).map(|(v, d)| to_engine(v, d)))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("sweep produced no points".to_string());
    }
    Ok(values)
}

/// Everything the dispatcher needs, fully resolved and hashable.
///
/// Serialization order is part of the hash identity; fields are never
/// reordered without accepting that existing hashes change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub preset: String,
    pub experiment: String,
    pub n_y: usize,
    pub n_z: usize,
    pub spacing: f64,
    pub element_area: f64,
    pub ap_distance: f64,
    pub wavelength: f64,
    pub tx_power_user1: f64,
    pub tx_power_user2: f64,
    pub noise_power: f64,
    pub ref_path_gain: f64,
    pub path_loss_exp: f64,
    pub d_h1: f64,
    pub d_g1: f64,
    pub user2_distance: f64,
    pub user2_antenna_area: f64,
    pub psk_order: usize,
    pub seed: u64,
    pub target_errors: u64,
    pub max_pairs: u64,
    pub schemes: Vec<String>,
    pub sweep_variable: String,
    pub sweep_values: Vec<f64>,
}

impl ResolvedConfig {
    /// Lowercase hex SHA-256 of the canonical JSON serialization.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("resolved config serializes");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    pub fn geometry(&self) -> Result<IrsGeometry, String> {
        IrsGeometry::new(
            self.n_y,
            self.n_z,
            self.spacing,
            self.element_area,
            self.ap_distance,
        )
        .map_err(|e| e.to_string())
    }

    pub fn system_params(&self) -> SystemParams {
        SystemParams {
            wavelength: self.wavelength,
            tx_power_user1: self.tx_power_user1,
            tx_power_user2: self.tx_power_user2,
            noise_power: self.noise_power,
            ref_path_gain: self.ref_path_gain,
            path_loss_exp: self.path_loss_exp,
            d_h1: self.d_h1,
            d_g1: self.d_g1,
            user2_distance: self.user2_distance,
            user2_antenna_area: self.user2_antenna_area,
            psk_order: self.psk_order,
        }
    }

    fn scheme_enums(&self) -> Vec<Scheme> {
        self.schemes
            .iter()
            .map(|t| Scheme::parse(t).expect("schemes were validated during resolution"))
            .collect()
    }

    /// Builds the engine run specification, embedding the config hash.
    pub fn run_spec(&self) -> Result<RunSpec, String> {
        Ok(RunSpec {
            geom: self.geometry()?,
            params: self.system_params(),
            schemes: self.scheme_enums(),
            seed: self.seed,
            config_hash: self.config_hash(),
            budget: MonteCarloBudget {
                target_errors: self.target_errors,
                max_pairs: self.max_pairs,
            },
        })
    }

    /// Sweep values as element counts (for surface-size sweeps).
    pub fn sweep_as_counts(&self) -> Vec<usize> {
        self.sweep_values.iter().map(|&v| v as usize).collect()
    }

    /// Sweep values as symbol periods (for coherence sweeps).
    pub fn sweep_as_intervals(&self) -> Vec<u64> {
        self.sweep_values.iter().map(|&v| v as u64).collect()
    }
}

/// Raw command-line inputs feeding the resolution pipeline.
pub struct Inputs<'a> {
    pub experiment: Experiment,
    pub preset: &'a str,
    pub config_path: Option<&'a Path>,
    pub seed: Option<u64>,
    pub sets: &'a [String],
    pub schemes: Option<&'a str>,
    pub sweep: Option<&'a str>,
}

/// Runs the full resolution pipeline and validates every invariant the
/// engine would otherwise reject mid-run.
pub fn resolve(inputs: &Inputs) -> Result<ResolvedConfig, String> {
    let mut b = preset_base(inputs.preset)?;

    if let Some(path) = inputs.config_path {
        let label = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| format!("{label}: {e}"))?;
        for entry in parse_file(&text, &label)? {
            let ctx = format!("{label}:{}", entry.line);
            apply_entry(&mut b, &entry.key, &entry.value, &ctx)?;
        }
    }

    for set in inputs.sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| format!("--set '{set}': expected KEY=VALUE"))?;
        let key = key.trim();
        if key_section(key).is_none() {
            return Err(format!("--set: unknown key '{key}'"));
        }
        apply_entry(&mut b, key, value, &format!("--set {key}"))?;
    }

    if let Some(seed) = inputs.seed {
        b.seed = seed;
    }
    if let Some(schemes) = inputs.schemes {
        b.schemes_raw = schemes.to_string();
    }
    if let Some(sweep) = inputs.sweep {
        b.sweep_raw = Some(sweep.to_string());
    }

    let schemes = parse_schemes(&b.schemes_raw)?;

    let (sweep_variable, sweep_values) = match inputs.experiment.sweep_plan() {
        Some((var, kind)) => match &b.sweep_raw {
            Some(raw) => (var.to_string(), parse_sweep(raw, var, kind)?),
            None => (var.to_string(), inputs.experiment.default_sweep()),
        },
        None => {
            // A sweep key left in a shared config file is ignored here, but
            // an explicit --sweep flag on a sweep-less subcommand is a
            // contradiction worth reporting.
            if inputs.sweep.is_some() {
                return Err(format!(
                    "{} takes no --sweep",
                    inputs.experiment.name()
                ));
            }
            ("none".to_string(), Vec::new())
        }
    };

    if b.max_pairs == 0 {
        return Err("max_pairs must be at least 1".to_string());
    }

    let resolved = ResolvedConfig {
        preset: inputs.preset.to_string(),
        experiment: inputs.experiment.name().to_string(),
        n_y: b.n_y,
        n_z: b.n_z,
        spacing: b.spacing,
        element_area: b.element_area,
        ap_distance: b.ap_distance,
        wavelength: b.wavelength,
        tx_power_user1: b.tx_power_user1,
        tx_power_user2: b.tx_power_user2,
        noise_power: b.noise_power,
        ref_path_gain: b.ref_path_gain,
        path_loss_exp: b.path_loss_exp,
        d_h1: b.d_h1,
        d_g1: b.d_g1,
        user2_distance: b.user2_distance,
        user2_antenna_area: b.user2_antenna_area,
        psk_order: b.psk_order,
        seed: b.seed,
        target_errors: b.target_errors,
        max_pairs: b.max_pairs,
        schemes,
        sweep_variable,
        sweep_values,
    };

    // Cross-field invariants: surface the engine's own key-naming errors
    // before any compute starts.
    let geom = resolved.geometry()?;
    channel::validate_scenario(&geom, &resolved.system_params()).map_err(|e| e.to_string())?;

    Ok(resolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare_inputs(experiment: Experiment) -> Inputs<'static> {
        Inputs {
            experiment,
            preset: "paper-default",
            config_path: None,
            seed: None,
            sets: &[],
            schemes: None,
            sweep: None,
        }
    }

    fn resolve_with(experiment: Experiment, sets: &[String]) -> Result<ResolvedConfig, String> {
        resolve(&Inputs {
            sets,
            ..bare_inputs(experiment)
        })
    }

    #[test]
    fn suffixes_cover_db_dbm_and_linear() {
        assert_eq!(parse_power("-85dBm").unwrap(), from_decibels(-85.0));
        assert_eq!(parse_power("-30dB").unwrap(), from_decibels(-30.0));
        assert_eq!(parse_power("30DBM").unwrap(), 1000.0);
        assert_eq!(parse_power("2.5").unwrap(), 2.5);
        assert_eq!(parse_power(" 10 dBm ").unwrap(), 10.0);
        assert!(parse_power("watt").is_err());
        assert!(parse_linear("3dB").is_err());
        assert_eq!(parse_linear("80").unwrap(), 80.0);
    }

    #[test]
    fn preset_resolves_reference_scenario() {
        let r = resolve(&bare_inputs(Experiment::SerVsPower)).unwrap();
        let geom = r.geometry().unwrap();
        assert_eq!(geom.num_elements(), 105 * 105);
        assert!((geom.epsilon() - 0.05).abs() < 1e-15);
        assert!((geom.occupation_ratio() - 1.0).abs() < 1e-15);
        assert_eq!(r.tx_power_user1, 1000.0);
        assert_eq!(r.noise_power, from_decibels(-85.0));
        assert_eq!(r.ref_path_gain, from_decibels(-30.0));
        assert_eq!(r.psk_order, 8);
        assert_eq!(r.schemes.len(), 5);
        // Default power sweep: 20..30 dBm in 2 dB steps.
        assert_eq!(r.sweep_values.len(), 6);
        assert!((r.sweep_values[0] - 100.0).abs() < 1e-9);
        assert!((r.sweep_values[5] - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn pseudo_keys_fan_out_to_both_fields() {
        let sets = vec![
            "n_bar=50".to_string(),
            "tx_power=10dBm".to_string(),
            "user1_distance=120".to_string(),
        ];
        let r = resolve_with(Experiment::GainVsElements, &sets).unwrap();
        assert_eq!((r.n_y, r.n_z), (50, 50));
        assert_eq!((r.tx_power_user1, r.tx_power_user2), (10.0, 10.0));
        assert_eq!((r.d_h1, r.d_g1), (120.0, 120.0));
    }

    #[test]
    fn later_set_overrides_earlier() {
        let sets = vec!["seed=3".to_string(), "seed=9".to_string()];
        let r = resolve_with(Experiment::Validate, &sets).unwrap();
        assert_eq!(r.seed, 9);
    }

    #[test]
    fn file_entries_are_validated_with_line_numbers() {
        // Unknown key.
        let err = parse_file("[system]\nbogus = 1\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:2") && err.contains("bogus"), "{err}");
        // Wrong section.
        let err = parse_file("[geometry]\nnoise_power = 1\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:2") && err.contains("[system]"), "{err}");
        // Key before any section.
        let err = parse_file("n_y = 4\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:1") && err.contains("before any"), "{err}");
        // Duplicate key.
        let err = parse_file("[run]\nseed = 1\nseed = 2\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:3") && err.contains("line 2"), "{err}");
        // Unknown section.
        let err = parse_file("[stuff]\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:1") && err.contains("stuff"), "{err}");
        // Missing '='.
        let err = parse_file("[run]\nseed\n", "cfg").unwrap_err();
        assert!(err.contains("cfg:2"), "{err}");
        // Comments and blank lines are fine; values keep inline comments out.
        let entries =
            parse_file("# header\n[run]\nseed = 7 ; trailing\n\n[geometry]\nn_bar = 4\n", "cfg")
                .unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].value, "7");
    }

    #[test]
    fn schemes_reject_unknown_and_duplicates() {
        assert_eq!(
            parse_schemes("proposed, siso").unwrap(),
            vec!["proposed".to_string(), "siso".to_string()]
        );
        assert!(parse_schemes("proposed,warp_drive").unwrap_err().contains("warp_drive"));
        assert!(parse_schemes("siso,siso").unwrap_err().contains("twice"));
        assert!(parse_schemes("").is_err());
    }

    #[test]
    fn sweep_ranges_step_in_the_written_domain() {
        let v = parse_sweep("tx_power=20dBm:30dBm:5dBm", "tx_power", SweepKind::Power).unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 100.0).abs() < 1e-9);
        assert!((v[1] - from_decibels(25.0)).abs() < 1e-6);
        assert!((v[2] - 1000.0).abs() < 1e-6);
        // Linear range on the same variable.
        let v = parse_sweep("tx_power=100:300:100", "tx_power", SweepKind::Power).unwrap();
        assert_eq!(v, vec![100.0, 200.0, 300.0]);
        // Explicit list with mixed spellings.
        let v = parse_sweep("tx_power=100,20dBm", "tx_power", SweepKind::Power).unwrap();
        assert!((v[1] - 100.0).abs() < 1e-9);
        // Counts are integers.
        let v = parse_sweep("n_bar=5,25,45", "n_bar", SweepKind::Count).unwrap();
        assert_eq!(v, vec![5.0, 25.0, 45.0]);
        let v = parse_sweep("n_bar=10:30:10", "n_bar", SweepKind::Count).unwrap();
        assert_eq!(v, vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn sweep_rejects_malformed_specifications() {
        let e = parse_sweep("n_bar=5", "tx_power", SweepKind::Power).unwrap_err();
        assert!(e.contains("tx_power"), "{e}");
        assert!(parse_sweep("tx_power=30dBm:20dBm:2dBm", "tx_power", SweepKind::Power)
            .unwrap_err()
            .contains("backwards"));
        assert!(parse_sweep("tx_power=20:30:0", "tx_power", SweepKind::Power)
            .unwrap_err()
            .contains("positive"));
        assert!(parse_sweep("tx_power=20dBm:30dBm:2", "tx_power", SweepKind::Power)
            .unwrap_err()
            .contains("mixes"));
        assert!(parse_sweep("tx_power=1:2", "tx_power", SweepKind::Power)
            .unwrap_err()
            .contains("start:stop:step"));
        assert!(parse_sweep("user2_distance=50dB:100dB:10dB", "user2_distance", SweepKind::Length)
            .is_err());
        assert!(parse_sweep("n_bar=0,5", "n_bar", SweepKind::Count)
            .unwrap_err()
            .contains("at least 1"));
        assert!(parse_sweep("tx_power=0.001:1000:0.001", "tx_power", SweepKind::Power)
            .unwrap_err()
            .contains("limit"));
    }

    #[test]
    fn sweepless_experiments_reject_the_flag_but_ignore_file_keys() {
        let err = resolve(&Inputs {
            sweep: Some("n_bar=5"),
            ..bare_inputs(Experiment::Validate)
        })
        .unwrap_err();
        assert!(err.contains("takes no --sweep"), "{err}");
        // A sweep pushed through --set (as a file would) is ignored.
        let sets = vec!["sweep=tx_power=20dBm:30dBm:2dBm".to_string()];
        let r = resolve_with(Experiment::Validate, &sets).unwrap();
        assert_eq!(r.sweep_variable, "none");
        assert!(r.sweep_values.is_empty());
    }

    #[test]
    fn set_sweep_key_carries_the_grid() {
        // split_once keeps everything after the first '=' as the value.
        let sets = vec!["sweep=tx_power=10dBm:20dBm:10dBm".to_string()];
        let r = resolve_with(Experiment::SerVsPower, &sets).unwrap();
        assert_eq!(r.sweep_values.len(), 2);
        assert!((r.sweep_values[0] - 10.0).abs() < 1e-12);
        assert!((r.sweep_values[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn invariant_violations_name_the_failing_key() {
        let err = resolve_with(
            Experiment::SerVsPower,
            &["spacing=0".to_string()],
        )
        .unwrap_err();
        assert!(err.contains("spacing"), "{err}");
        // User 2 closer than the AP standoff breaks the geometry premise.
        let err = resolve_with(
            Experiment::GainVsDistance,
            &["user2_distance=0.2".to_string()],
        )
        .unwrap_err();
        assert!(err.contains("user2_distance"), "{err}");
        let err = resolve_with(
            Experiment::SerVsPower,
            &["psk_order=3".to_string()],
        )
        .unwrap_err();
        assert!(err.contains("psk_order"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = resolve(&bare_inputs(Experiment::SerVsPower)).unwrap();
        let b = resolve(&bare_inputs(Experiment::SerVsPower)).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
        let c = resolve(&Inputs {
            seed: Some(42),
            ..bare_inputs(Experiment::SerVsPower)
        })
        .unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn unknown_preset_is_rejected() {
        let err = resolve(&Inputs {
            preset: "mystery",
            ..bare_inputs(Experiment::Validate)
        })
        .unwrap_err();
        assert!(err.contains("mystery") && err.contains("paper-default"), "{err}");
    }

    #[test]
    fn default_sweeps_match_each_experiment() {
        let r = resolve(&bare_inputs(Experiment::GainVsDistance)).unwrap();
        assert_eq!(r.sweep_variable, "user2_distance");
        assert_eq!(r.sweep_values, vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0]);
        let r = resolve(&bare_inputs(Experiment::RateVsCoherence)).unwrap();
        assert_eq!(r.sweep_variable, "coherence_interval");
        assert_eq!(r.sweep_as_intervals()[3], 102);
        let r = resolve(&bare_inputs(Experiment::SerVsElements)).unwrap();
        assert_eq!(r.sweep_as_counts(), vec![5, 25, 45, 65, 85, 105]);
    }
}
