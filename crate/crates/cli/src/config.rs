//! Layered settings: built-in defaults < config file top level < config
//! file `[command]` section < command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use guiltevo_core::{GameSpec, SimConfig, Strategy, UpdateRule};

use crate::error::{config_err, io_err, CliError};

/// Every tunable value. All optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// wellmixed | lattice | scalefree
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    /// Sweep only: several topologies, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topologies: Option<Vec<String>>,
    /// Lattice side length.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    /// Population size (well-mixed and scale-free).
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    /// Links per new node in the scale-free graph.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Initial clique size of the scale-free graph (default m + 1).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    /// Number of pre-seeded scale-free networks replicates cycle over.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub networks: Option<usize>,
    /// Use a graph from an edge list instead of generating one.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network_file: Option<PathBuf>,
    /// Write the generated networks as edge lists next to the outputs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_networks: Option<bool>,
    /// Benefit of cooperation in the donation game.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Cost of cooperation (default 1).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Guilt cost paid per guilt episode.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Social cost paid by social strategies on each defection.
    #[arg(long = "gamma-s", allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<f64>,
    /// Rounds per encounter (default 10).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<u32>,
    /// Selection intensity (default 1).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Generations per run (default 1000000).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    /// Trailing generations averaged into the results (default 100000).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    /// Independent runs (default 30, or 20 on scale-free graphs).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Master seed; replicate and network seeds derive from it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Output directory (default ./out).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// sync | async
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update: Option<String>,
    /// Strategies present at start, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<String>>,
    /// Write timeseries.csv.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeseries: Option<bool>,
    /// Time-series thinning interval.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_every: Option<u64>,
    /// Sweep: guilt costs.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Vec<f64>>,
    /// Sweep: social costs.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_s_list: Option<Vec<f64>>,
    /// Sweep: benefits.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_list: Option<Vec<f64>>,
    /// Sweep: abm | analytic
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Cluster: steps at which to record neighbourhood composition.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<u64>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Values in `top` win over values in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(base, top;
            topology, topologies, side, population, m, m0, networks, network_file,
            export_networks, b, c, gamma, gamma_s, omega, beta, steps, window,
            replicates, seed, jobs, out, update, strategies, timeseries, series_every,
            gamma_grid, gamma_s_list, b_list, mode, snapshots,
        )
    }
}

const SECTIONS: [&str; 5] = ["analytic", "simulate", "sweep", "cluster", "matrix"];

/// Reads a TOML config file. Top-level keys apply to every command; a
/// table named after `command` overrides them. Other command tables and a
/// `[manifest]` table are ignored.
pub fn load_file(path: &Path, command: &str) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            config_err(format!("config file {} not found", path.display()))
        } else {
            io_err(path, e)
        }
    })?;
    parse_str(&text, command).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

pub fn parse_str(text: &str, command: &str) -> Result<Settings, String> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
    let mut base = toml::Table::new();
    let mut section = None;
    for (key, value) in table {
        match value {
            toml::Value::Table(t) if key == command => section = Some(t),
            toml::Value::Table(_) if key == "manifest" || SECTIONS.contains(&key.as_str()) => {}
            toml::Value::Table(_) => return Err(format!("unknown section [{key}]")),
            other => {
                base.insert(key, other);
            }
        }
    }
    let base: Settings = toml::Value::Table(base)
        .try_into()
        .map_err(|e: toml::de::Error| e.to_string())?;
    let section: Settings = match section {
        Some(t) => toml::Value::Table(t)
            .try_into()
            .map_err(|e: toml::de::Error| format!("[{command}]: {e}"))?,
        None => Settings::default(),
    };
    Ok(base.overlay(section))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyChoice {
    WellMixed,
    Lattice,
    ScaleFree,
}

impl TopologyChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wellmixed" | "well-mixed" | "complete" => Ok(TopologyChoice::WellMixed),
            "lattice" => Ok(TopologyChoice::Lattice),
            "scalefree" | "scale-free" | "scale_free" => Ok(TopologyChoice::ScaleFree),
            other => Err(config_err(format!(
                "unknown topology '{other}' (expected wellmixed, lattice or scalefree)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TopologyChoice::WellMixed => "wellmixed",
            TopologyChoice::Lattice => "lattice",
            TopologyChoice::ScaleFree => "scalefree",
        }
    }
}

/// Defaults that differ between commands.
#[derive(Debug, Clone, Copy)]
pub struct GameDefaults {
    pub b: f64,
    pub gamma: f64,
    pub gamma_s: f64,
}

pub const C_DEFAULT: f64 = 1.0;
pub const OMEGA_DEFAULT: u32 = 10;
pub const BETA_DEFAULT: f64 = 1.0;

pub fn game_spec(s: &Settings, defaults: GameDefaults) -> Result<GameSpec, CliError> {
    Ok(GameSpec::donation(
        s.b.unwrap_or(defaults.b),
        s.c.unwrap_or(C_DEFAULT),
        s.omega.unwrap_or(OMEGA_DEFAULT),
        s.gamma.unwrap_or(defaults.gamma),
        s.gamma_s.unwrap_or(defaults.gamma_s),
    )?)
}

pub fn strategies(s: &Settings) -> Result<Vec<Strategy>, CliError> {
    let Some(list) = &s.strategies else {
        return Ok(Strategy::ALL.to_vec());
    };
    let mut out = Vec::new();
    for name in list {
        let st: Strategy = name.parse()?;
        if out.contains(&st) {
            return Err(config_err(format!("strategy {st} listed twice")));
        }
        out.push(st);
    }
    if out.is_empty() {
        return Err(config_err("strategy list must not be empty"));
    }
    // Canonical order keeps outputs independent of how the list was written.
    out.sort();
    Ok(out)
}

pub fn update_rule(s: &Settings) -> Result<UpdateRule, CliError> {
    match s.update.as_deref().map(|u| u.trim().to_ascii_lowercase()) {
        None => Ok(UpdateRule::default()),
        Some(u) if u == "async" || u == "asynchronous" => Ok(UpdateRule::Asynchronous),
        Some(u) if u == "sync" || u == "synchronous" => Ok(UpdateRule::Synchronous),
        Some(u) => Err(config_err(format!(
            "unknown update rule '{u}' (expected sync or async)"
        ))),
    }
}

pub fn update_label(rule: UpdateRule) -> &'static str {
    match rule {
        UpdateRule::Synchronous => "sync",
        UpdateRule::Asynchronous => "async",
    }
}

pub fn sim_config(s: &Settings, topology: TopologyChoice) -> Result<SimConfig, CliError> {
    let defaults = SimConfig::default();
    let config = SimConfig {
        steps: s.steps.unwrap_or(defaults.steps),
        measure_window: s.window.unwrap_or(defaults.measure_window),
        replicates: s
            .replicates
            .unwrap_or(if topology == TopologyChoice::ScaleFree {
                20
            } else {
                30
            }),
        beta: s.beta.unwrap_or(BETA_DEFAULT),
        update_rule: update_rule(s)?,
        allowed: strategies(s)?,
        seed: s.seed.unwrap_or(0),
        series_every: if s.timeseries.unwrap_or(false) {
            s.series_every.unwrap_or(100).max(1)
        } else {
            0
        },
        snapshot_steps: Vec::new(),
    };
    config.validate()?;
    Ok(config)
}
