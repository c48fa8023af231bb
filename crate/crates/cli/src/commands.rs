//! The subcommands. Each one resolves its settings, computes everything in
//! memory and returns the files to write; nothing here touches the disk
//! except reading an input edge list.

use std::path::PathBuf;

use rayon::prelude::*;

use guiltevo_core::abm::{aggregate, replicate_seed, run_replicates, Aggregate, RunResult};
use guiltevo_core::network::{build_complete, build_lattice, build_scale_free};
use guiltevo_core::seed::{derive_seed, Stream};
use guiltevo_core::wellmixed::{build_markov, closed_form_conditions, transition_directions};
use guiltevo_core::{
    coop_matrix, payoff_matrix, BaSpec, EvoParams, GameSpec, Network, SimConfig, Strategy,
};

use crate::config::{
    self, game_spec, sim_config, update_label, GameDefaults, Settings, TopologyChoice,
    BETA_DEFAULT, C_DEFAULT, OMEGA_DEFAULT,
};
use crate::error::{config_err, io_err, CliError};
use crate::manifest;
use crate::output::{num, strategy_columns, OutputSet, Table};

const ANALYTIC_GAME: GameDefaults = GameDefaults {
    b: 2.0,
    gamma: 1.0,
    gamma_s: 0.0,
};
const SIMULATE_GAME: GameDefaults = GameDefaults {
    b: 2.0,
    gamma: 1.0,
    gamma_s: 0.0,
};
const CLUSTER_GAME: GameDefaults = GameDefaults {
    b: 2.0,
    gamma: 4.0,
    gamma_s: 0.0,
};

const WELLMIXED_N: usize = 100;
const LATTICE_SIDE: usize = 30;
const SCALE_FREE_N: usize = 1000;
const SCALE_FREE_M: usize = 2;
const PRESEEDED_NETWORKS: usize = 10;

const GAMMA_GRID: [f64; 9] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
const GAMMA_S_LIST: [f64; 4] = [0.0, 0.1, 0.5, 1.0];
const B_LIST: [f64; 2] = [2.0, 4.0];

fn labels(strategies: &[Strategy]) -> Vec<String> {
    strategies.iter().map(|s| s.label().to_string()).collect()
}

/// Echoes the resolved game parameters into `echo`.
fn echo_game(echo: &mut Settings, spec: &GameSpec, b: f64, beta: f64) {
    echo.b = Some(b);
    echo.c = Some(spec.payoffs.s.abs());
    echo.gamma = Some(spec.guilt.gamma);
    echo.gamma_s = Some(spec.guilt.gamma_s);
    echo.omega = Some(spec.omega);
    echo.beta = Some(beta);
}

fn echo_sim(echo: &mut Settings, config: &SimConfig) {
    echo.steps = Some(config.steps);
    echo.window = Some(config.measure_window);
    echo.replicates = Some(config.replicates);
    echo.seed = Some(config.seed);
    echo.update = Some(update_label(config.update_rule).to_string());
    echo.strategies = Some(labels(&config.allowed));
    echo.timeseries = Some(config.series_every > 0);
    if config.series_every > 0 {
        echo.series_every = Some(config.series_every);
    }
}

fn check_seed(s: &Settings) -> Result<(), CliError> {
    // Manifests store the master seed as a TOML integer.
    match s.seed {
        Some(seed) if seed > i64::MAX as u64 => Err(config_err(format!(
            "seed must be at most {} (got {seed})",
            i64::MAX
        ))),
        _ => Ok(()),
    }
}

// ---------------------------------------------------------------- networks

#[derive(Debug, Clone)]
struct NetworkPlan {
    topology: TopologyChoice,
    label: &'static str,
    side: usize,
    population: usize,
    m: usize,
    m0: usize,
    count: usize,
    file: Option<PathBuf>,
}

fn network_plan(s: &Settings, topology: TopologyChoice) -> Result<NetworkPlan, CliError> {
    let m = s.m.unwrap_or(SCALE_FREE_M);
    let plan = NetworkPlan {
        topology,
        label: if s.network_file.is_some() {
            "custom"
        } else {
            topology.label()
        },
        side: s.side.unwrap_or(LATTICE_SIDE),
        population: s.population.unwrap_or(match topology {
            TopologyChoice::ScaleFree => SCALE_FREE_N,
            _ => WELLMIXED_N,
        }),
        m,
        m0: s.m0.unwrap_or(m + 1),
        count: s.networks.unwrap_or(PRESEEDED_NETWORKS),
        file: s.network_file.clone(),
    };
    if plan.file.is_none() {
        match topology {
            TopologyChoice::WellMixed if plan.population < 2 => {
                return Err(config_err(format!(
                    "population N must be >= 2 (got {})",
                    plan.population
                )))
            }
            TopologyChoice::Lattice if plan.side < 3 => {
                return Err(config_err(format!(
                    "lattice side L must be >= 3 (got {})",
                    plan.side
                )))
            }
            TopologyChoice::ScaleFree => {
                if plan.count < 1 {
                    return Err(config_err("networks must be >= 1"));
                }
                BaSpec {
                    nodes: plan.population,
                    m: plan.m,
                    m0: plan.m0,
                    seed: 0,
                }
                .validate()?;
            }
            _ => {}
        }
    }
    Ok(plan)
}

fn echo_network(echo: &mut Settings, plan: &NetworkPlan) {
    if let Some(file) = &plan.file {
        echo.network_file = Some(file.clone());
        return;
    }
    match plan.topology {
        TopologyChoice::WellMixed => echo.population = Some(plan.population),
        TopologyChoice::Lattice => echo.side = Some(plan.side),
        TopologyChoice::ScaleFree => {
            echo.population = Some(plan.population);
            echo.m = Some(plan.m);
            echo.m0 = Some(plan.m0);
            echo.networks = Some(plan.count);
        }
    }
}

/// Builds the graphs replicates run on. Scale-free graphs are pre-seeded
/// from a base seed derived from the master seed: base, base + 1, ...
fn build_networks(plan: &NetworkPlan, master: u64) -> Result<(Vec<Network>, Vec<u64>), CliError> {
    if let Some(path) = &plan.file {
        let file = std::fs::File::open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                config_err(format!("network file {} not found", path.display()))
            } else {
                io_err(path, e)
            }
        })?;
        let net = Network::read_edge_list(std::io::BufReader::new(file))
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        return Ok((vec![net], Vec::new()));
    }
    match plan.topology {
        TopologyChoice::WellMixed => Ok((vec![build_complete(plan.population)?], Vec::new())),
        TopologyChoice::Lattice => Ok((vec![build_lattice(plan.side)?], Vec::new())),
        TopologyChoice::ScaleFree => {
            let base = derive_seed(master, Stream::Network, 0);
            let seeds: Vec<u64> = (0..plan.count as u64)
                .map(|k| base.wrapping_add(k))
                .collect();
            let nets = seeds
                .par_iter()
                .map(|&seed| {
                    build_scale_free(&BaSpec {
                        nodes: plan.population,
                        m: plan.m,
                        m0: plan.m0,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((nets, seeds))
        }
    }
}

fn export_networks(out: &mut OutputSet, prefix: &str, nets: &[Network]) -> Result<(), CliError> {
    for (k, net) in nets.iter().enumerate() {
        let mut buf = Vec::new();
        net.write_edge_list(&mut buf)?;
        let text = String::from_utf8(buf).expect("edge lists are ascii");
        out.add(format!("{prefix}network_{k}.edges"), text);
    }
    Ok(())
}

fn topology_of(s: &Settings, default: TopologyChoice) -> Result<TopologyChoice, CliError> {
    s.topology
        .as_deref()
        .map(TopologyChoice::parse)
        .transpose()
        .map(|t| t.unwrap_or(default))
}

fn replicate_seeds(config: &SimConfig) -> Vec<u64> {
    (0..config.replicates)
        .map(|r| replicate_seed(config.seed, r))
        .collect()
}

// ---------------------------------------------------------------- analytic

/// Small-mutation analytics for a well-mixed population.
pub fn analytic(s: &Settings) -> Result<OutputSet, CliError> {
    check_seed(s)?;
    let spec = game_spec(s, ANALYTIC_GAME)?;
    let params = EvoParams::new(
        s.population.unwrap_or(WELLMIXED_N),
        s.beta.unwrap_or(BETA_DEFAULT),
    )?;
    let strategies = config::strategies(s)?;
    let payoff = payoff_matrix(&spec);
    let coop = coop_matrix(spec.omega)?;
    let model = build_markov(&strategies, &params, &payoff)?;

    let mut out = OutputSet::default();

    let mut t = Table::new(&["strategy", "frequency"]);
    for (st, p) in model.strategies.iter().zip(&model.stationary) {
        t.row(&[st.label().to_string(), num(*p)]);
    }
    out.add("stationary.csv", t.finish());

    let mut t = Table::new(&["resident", "mutant", "rho"]);
    for (i, resident) in model.strategies.iter().enumerate() {
        for (j, mutant) in model.strategies.iter().enumerate() {
            if i != j {
                t.row(&[
                    resident.label().to_string(),
                    mutant.label().to_string(),
                    num(model.fixation[i][j]),
                ]);
            }
        }
    }
    out.add("fixation.csv", t.finish());

    let mut t = Table::new(&["from", "to"]);
    for (from, to) in transition_directions(&model) {
        t.row(&[from.label(), to.label()]);
    }
    out.add("directions.csv", t.finish());

    let conditions = closed_form_conditions(&spec);
    let mut t = Table::new(&["condition", "margin", "holds"]);
    for c in &conditions.conditions {
        t.row(&[c.name.to_string(), num(c.margin), c.holds.to_string()]);
    }
    t.row(&[
        "cycle".to_string(),
        String::new(),
        conditions.cyclic.to_string(),
    ]);
    out.add("risk_conditions.csv", t.finish());

    out.add("payoff_matrix.csv", payoff.to_csv());
    out.add("coop_matrix.csv", coop.to_csv());

    let mut echo = Settings {
        population: Some(params.population),
        strategies: Some(labels(&strategies)),
        ..Default::default()
    };
    echo_game(&mut echo, &spec, spec.payoffs.t, params.beta);
    out.add(
        "manifest.toml",
        manifest::render("analytic", &echo, &[], &[])?,
    );
    Ok(out)
}

// ---------------------------------------------------------------- matrix

/// Pairwise payoff and cooperation matrices only.
pub fn matrix(s: &Settings) -> Result<OutputSet, CliError> {
    let spec = game_spec(s, ANALYTIC_GAME)?;
    let mut out = OutputSet::default();
    out.add("payoff_matrix.csv", payoff_matrix(&spec).to_csv());
    out.add("coop_matrix.csv", coop_matrix(spec.omega)?.to_csv());
    Ok(out)
}

// ---------------------------------------------------------------- simulate

fn aggregate_table(agg: &Aggregate) -> String {
    let mut t = Table::new(&["quantity", "mean", "sd"]);
    for st in Strategy::ALL {
        let i = st.index();
        t.row(&[
            format!("freq_{st}"),
            num(agg.frequency_mean[i]),
            num(agg.frequency_sd[i]),
        ]);
    }
    t.row(&[
        "cooperation".to_string(),
        num(agg.cooperation_mean),
        num(agg.cooperation_sd),
    ]);
    t.finish()
}

fn summary_table(results: &[RunResult]) -> String {
    let mut header = vec![
        "replicate".to_string(),
        "seed".into(),
        "network_seed".into(),
    ];
    header.extend(strategy_columns("freq_"));
    header.push("cooperation".into());
    let mut t = Table::new(&header);
    for (r, res) in results.iter().enumerate() {
        let mut row = vec![
            r.to_string(),
            res.seed.to_string(),
            res.network_seed.map(|s| s.to_string()).unwrap_or_default(),
        ];
        row.extend(res.frequencies.iter().map(|f| num(*f)));
        row.push(num(res.cooperation));
        t.row(&row);
    }
    t.finish()
}

fn timeseries_table(results: &[RunResult]) -> String {
    let mut header = vec!["replicate".to_string(), "step".into()];
    header.extend(strategy_columns("freq_"));
    header.push("cooperation".into());
    let mut t = Table::new(&header);
    for (r, res) in results.iter().enumerate() {
        for point in &res.series {
            let mut row = vec![r.to_string(), point.step.to_string()];
            row.extend(point.frequencies.iter().map(|f| num(*f)));
            row.push(num(point.cooperation));
            t.row(&row);
        }
    }
    t.finish()
}

/// Replicated agent-based runs on one topology.
pub fn simulate(s: &Settings) -> Result<OutputSet, CliError> {
    check_seed(s)?;
    let topology = topology_of(s, TopologyChoice::Lattice)?;
    let spec = game_spec(s, SIMULATE_GAME)?;
    let config = sim_config(s, topology)?;
    let plan = network_plan(s, topology)?;
    let (nets, network_seeds) = build_networks(&plan, config.seed)?;
    let results = run_replicates(&nets, &spec, &config)?;

    let mut out = OutputSet::default();
    out.add("run_summary.csv", summary_table(&results));
    out.add("aggregate.csv", aggregate_table(&aggregate(&results)));
    if config.series_every > 0 {
        out.add("timeseries.csv", timeseries_table(&results));
    }
    let export = s.export_networks.unwrap_or(false);
    if export {
        export_networks(&mut out, "", &nets)?;
    }

    let mut echo = Settings {
        topology: Some(topology.label().to_string()),
        export_networks: Some(export),
        ..Default::default()
    };
    echo_network(&mut echo, &plan);
    echo_game(&mut echo, &spec, spec.payoffs.t, config.beta);
    echo_sim(&mut echo, &config);
    out.add(
        "manifest.toml",
        manifest::render("simulate", &echo, &replicate_seeds(&config), &network_seeds)?,
    );
    Ok(out)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepMode {
    Abm,
    Analytic,
}

fn grid(values: &Option<Vec<f64>>, default: &[f64], name: &str) -> Result<Vec<f64>, CliError> {
    let values = values.clone().unwrap_or_else(|| default.to_vec());
    if values.is_empty() {
        return Err(config_err(format!("sweep grid {name} is empty")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(config_err(format!(
            "sweep grid {name} contains non-finite value {v}"
        )));
    }
    Ok(values)
}

struct Cell {
    topology: usize,
    b: f64,
    gamma: f64,
    gamma_s: f64,
    spec: GameSpec,
}

struct CellResult {
    frequencies: [f64; 6],
    coop_mean: f64,
    coop_sd: f64,
    replicates: usize,
}

fn sweep_header() -> Vec<String> {
    let mut header: Vec<String> = ["topology", "b", "gamma", "gamma_s"]
        .map(String::from)
        .to_vec();
    header.extend(strategy_columns("freq_"));
    header.extend(["coop_mean", "coop_sd", "replicates"].map(String::from));
    header
}

/// One aggregate row per (topology, b, gamma_s, gamma) cell.
pub fn sweep(s: &Settings) -> Result<OutputSet, CliError> {
    check_seed(s)?;
    let mode = match s.mode.as_deref().map(|m| m.trim().to_ascii_lowercase()) {
        None => SweepMode::Abm,
        Some(m) if m == "abm" => SweepMode::Abm,
        Some(m) if m == "analytic" => SweepMode::Analytic,
        Some(m) => {
            return Err(config_err(format!(
                "unknown sweep mode '{m}' (expected abm or analytic)"
            )))
        }
    };
    let gammas = grid(&s.gamma_grid, &GAMMA_GRID, "gamma_grid")?;
    let gamma_ss = grid(&s.gamma_s_list, &GAMMA_S_LIST, "gamma_s_list")?;
    let bs = grid(&s.b_list, &B_LIST, "b_list")?;
    let c = s.c.unwrap_or(C_DEFAULT);
    let omega = s.omega.unwrap_or(OMEGA_DEFAULT);
    let beta = s.beta.unwrap_or(BETA_DEFAULT);

    let topologies: Vec<TopologyChoice> = match mode {
        SweepMode::Analytic => vec![TopologyChoice::WellMixed],
        SweepMode::Abm => match (&s.topologies, &s.topology) {
            (Some(list), _) => list
                .iter()
                .map(|t| TopologyChoice::parse(t))
                .collect::<Result<_, _>>()?,
            (None, Some(t)) => vec![TopologyChoice::parse(t)?],
            (None, None) => vec![TopologyChoice::Lattice],
        },
    };
    if topologies.is_empty() {
        return Err(config_err("sweep topology list is empty"));
    }

    let mut cells = Vec::new();
    for t in 0..topologies.len() {
        for &b in &bs {
            for &gamma_s in &gamma_ss {
                for &gamma in &gammas {
                    let spec = GameSpec::donation(b, c, omega, gamma, gamma_s)?;
                    cells.push(Cell {
                        topology: t,
                        b,
                        gamma,
                        gamma_s,
                        spec,
                    });
                }
            }
        }
    }

    let mut echo = Settings {
        mode: Some(match mode {
            SweepMode::Abm => "abm".into(),
            SweepMode::Analytic => "analytic".into(),
        }),
        gamma_grid: Some(gammas.clone()),
        gamma_s_list: Some(gamma_ss.clone()),
        b_list: Some(bs.clone()),
        c: Some(c),
        omega: Some(omega),
        beta: Some(beta),
        ..Default::default()
    };
    let mut out = OutputSet::default();
    let mut table = Table::new(&sweep_header());
    let rep_seeds;
    let mut network_seeds = Vec::new();

    match mode {
        SweepMode::Analytic => {
            let params = EvoParams::new(s.population.unwrap_or(WELLMIXED_N), beta)?;
            let strategies = config::strategies(s)?;
            let coop = coop_matrix(omega)?;
            let results = cells
                .par_iter()
                .map(|cell| {
                    let model = build_markov(&strategies, &params, &payoff_matrix(&cell.spec))?;
                    let mut frequencies = [0.0; 6];
                    let mut coop_mean = 0.0;
                    for (st, p) in model.strategies.iter().zip(&model.stationary) {
                        frequencies[st.index()] = *p;
                        coop_mean += p * coop[(*st, *st)];
                    }
                    Ok(CellResult {
                        frequencies,
                        coop_mean,
                        coop_sd: 0.0,
                        replicates: 0,
                    })
                })
                .collect::<Result<Vec<_>, guiltevo_core::Error>>()?;
            for (cell, res) in cells.iter().zip(&results) {
                push_sweep_row(&mut table, "wellmixed", cell, res);
            }
            echo.population = Some(params.population);
            echo.strategies = Some(labels(&strategies));
            rep_seeds = Vec::new();
        }
        SweepMode::Abm => {
            // Validate every topology before any simulation starts.
            let mut plans = Vec::new();
            let mut configs = Vec::new();
            for &t in &topologies {
                configs.push(sim_config(s, t)?);
                plans.push(network_plan(s, t)?);
            }
            let mut nets = Vec::new();
            for (plan, config) in plans.iter().zip(&configs) {
                let (n, seeds) = build_networks(plan, config.seed)?;
                nets.push(n);
                network_seeds.extend(seeds);
            }
            let results = cells
                .par_iter()
                .map(|cell| {
                    let config = &configs[cell.topology];
                    let agg = aggregate(&run_replicates(&nets[cell.topology], &cell.spec, config)?);
                    Ok(CellResult {
                        frequencies: agg.frequency_mean,
                        coop_mean: agg.cooperation_mean,
                        coop_sd: agg.cooperation_sd,
                        replicates: agg.replicates,
                    })
                })
                .collect::<Result<Vec<_>, guiltevo_core::Error>>()?;
            for (cell, res) in cells.iter().zip(&results) {
                push_sweep_row(&mut table, plans[cell.topology].label, cell, res);
            }
            echo.topologies = Some(topologies.iter().map(|t| t.label().to_string()).collect());
            for plan in &plans {
                echo_network(&mut echo, plan);
            }
            echo_sim(&mut echo, &configs[0]);
            // Replicate counts differ per topology unless set explicitly.
            echo.replicates = s.replicates;
            if s.export_networks.unwrap_or(false) {
                for (plan, n) in plans.iter().zip(&nets) {
                    export_networks(&mut out, &format!("{}_", plan.label), n)?;
                }
            }
            echo.export_networks = Some(s.export_networks.unwrap_or(false));
            let max_reps = configs.iter().map(|c| c.replicates).max().unwrap_or(0);
            rep_seeds = (0..max_reps)
                .map(|r| replicate_seed(configs[0].seed, r))
                .collect();
        }
    }

    out.add("sweep.csv", table.finish());
    out.add(
        "manifest.toml",
        manifest::render("sweep", &echo, &rep_seeds, &network_seeds)?,
    );
    Ok(out)
}

fn push_sweep_row(table: &mut Table, topology: &str, cell: &Cell, res: &CellResult) {
    let mut row = vec![
        topology.to_string(),
        num(cell.b),
        num(cell.gamma),
        num(cell.gamma_s),
    ];
    row.extend(res.frequencies.iter().map(|f| num(*f)));
    row.extend([
        num(res.coop_mean),
        num(res.coop_sd),
        res.replicates.to_string(),
    ]);
    table.row(&row);
}

// ---------------------------------------------------------------- cluster

/// Neighbourhood composition snapshots on a structured population.
pub fn cluster(s: &Settings) -> Result<OutputSet, CliError> {
    check_seed(s)?;
    let topology = topology_of(s, TopologyChoice::Lattice)?;
    if topology == TopologyChoice::WellMixed {
        return Err(config_err(
            "cluster needs a structured topology (lattice or scalefree); in a well-mixed population every neighbourhood is the whole population",
        ));
    }
    let spec = game_spec(s, CLUSTER_GAME)?;
    let mut config = sim_config(s, topology)?;
    let mut snapshots = s.snapshots.clone().unwrap_or_else(|| vec![config.steps]);
    if snapshots.is_empty() {
        return Err(config_err("snapshot list is empty"));
    }
    snapshots.sort_unstable();
    snapshots.dedup();
    config.snapshot_steps = snapshots.clone();
    config.validate()?;
    let plan = network_plan(s, topology)?;
    let (nets, network_seeds) = build_networks(&plan, config.seed)?;
    let results = run_replicates(&nets, &spec, &config)?;

    let mut header = vec![
        "replicate".to_string(),
        "step".into(),
        "focal_strategy".into(),
        "population_share".into(),
    ];
    header.extend(strategy_columns("frac_"));
    let mut t = Table::new(&header);
    for (r, res) in results.iter().enumerate() {
        for snap in &res.snapshots {
            for row in snap.composition.present() {
                let Some(neighbors) = row.neighbors else {
                    continue;
                };
                let mut fields = vec![
                    r.to_string(),
                    snap.step.to_string(),
                    row.strategy.label().to_string(),
                    num(row.share),
                ];
                fields.extend(neighbors.iter().map(|f| num(*f)));
                t.row(&fields);
            }
        }
    }

    let mut out = OutputSet::default();
    out.add("clusters.csv", t.finish());
    out.add("run_summary.csv", summary_table(&results));
    let mut echo = Settings {
        topology: Some(topology.label().to_string()),
        snapshots: Some(snapshots),
        ..Default::default()
    };
    echo_network(&mut echo, &plan);
    echo_game(&mut echo, &spec, spec.payoffs.t, config.beta);
    echo_sim(&mut echo, &config);
    out.add(
        "manifest.toml",
        manifest::render("cluster", &echo, &replicate_seeds(&config), &network_seeds)?,
    );
    Ok(out)
}
