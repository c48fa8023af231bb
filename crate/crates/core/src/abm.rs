//! Agent-based imitation dynamics on a fixed network.
//!
//! Every step each agent plays the iterated game with all of its neighbours
//! (fitness is the sum of per-round average payoffs) and then considers
//! copying one uniformly chosen neighbour with the Fermi probability.
//! There is no mutation.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::game::{coop_matrix, payoff_matrix, GameSpec, Strategy, StrategyMatrix};
use crate::network::{Network, Topology};
use crate::seed::{derive_seed, rng_from_seed, SimRng, Stream};
use crate::wellmixed::fermi_probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// All agents revise simultaneously from a frozen snapshot.
    Synchronous,
    /// `N` sequential single-agent revisions per step.
    #[default]
    Asynchronous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub steps: u64,
    /// Trailing number of steps averaged into the result.
    pub measure_window: u64,
    pub replicates: usize,
    pub beta: f64,
    pub update_rule: UpdateRule,
    pub allowed: Vec<Strategy>,
    pub seed: u64,
    /// Keep every n-th step in the time series; 0 keeps none.
    pub series_every: u64,
    /// Steps at which to record a neighbourhood-composition snapshot.
    pub snapshot_steps: Vec<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 1_000_000,
            measure_window: 100_000,
            replicates: 30,
            beta: 1.0,
            update_rule: UpdateRule::Asynchronous,
            allowed: Strategy::ALL.to_vec(),
            seed: 0,
            series_every: 100,
            snapshot_steps: Vec::new(),
        }
    }
}

impl SimConfig {
    /// Defaults for a given topology (fewer replicates on scale-free graphs).
    pub fn for_topology(topology: Topology) -> Self {
        let replicates = if topology == Topology::ScaleFree {
            20
        } else {
            30
        };
        Self {
            replicates,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(invalid("steps must be >= 1"));
        }
        if self.measure_window < 1 {
            return Err(invalid("measure window must be >= 1"));
        }
        if self.measure_window > self.steps {
            return Err(invalid(format!(
                "measure window ({}) must not exceed steps ({})",
                self.measure_window, self.steps
            )));
        }
        if self.replicates < 1 {
            return Err(invalid("replicates must be >= 1"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid(format!(
                "selection intensity beta must be >= 0 (got {})",
                self.beta
            )));
        }
        if self.allowed.is_empty() {
            return Err(invalid("allowed strategy set must not be empty"));
        }
        if let Some(&t) = self.snapshot_steps.iter().find(|&&t| t > self.steps) {
            return Err(invalid(format!(
                "snapshot step {t} is beyond the last step ({})",
                self.steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationState {
    pub strategies: Vec<Strategy>,
    pub step: u64,
}

impl PopulationState {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        Self {
            strategies,
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for s in &self.strategies {
            counts[s.index()] += 1;
        }
        counts
    }

    pub fn frequencies(&self) -> [f64; 6] {
        let n = self.len() as f64;
        self.counts().map(|c| c as f64 / n)
    }

    pub fn is_monomorphic(&self) -> bool {
        self.strategies.windows(2).all(|w| w[0] == w[1])
    }
}

/// Independent uniform draw from `allowed` for every node.
pub fn init_population(
    net: &Network,
    allowed: &[Strategy],
    rng: &mut SimRng,
) -> Result<PopulationState> {
    if allowed.is_empty() {
        return Err(invalid("allowed strategy set must not be empty"));
    }
    let strategies = (0..net.len())
        .map(|_| allowed[rng.random_range(0..allowed.len())])
        .collect();
    Ok(PopulationState::new(strategies))
}

/// Sum of payoffs against every neighbour; isolated nodes score 0.
pub fn node_fitness(
    node: usize,
    state: &PopulationState,
    net: &Network,
    payoff: &StrategyMatrix,
) -> f64 {
    let own = state.strategies[node];
    net.neighbors(node)
        .iter()
        .map(|&j| payoff.get(own, state.strategies[j]))
        .sum()
}

/// Mean cooperation fraction over ordered adjacent pairs.
pub fn cooperation_level(state: &PopulationState, coop: &StrategyMatrix, net: &Network) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, &s) in state.strategies.iter().enumerate() {
        for &j in net.neighbors(i) {
            total += coop.get(s, state.strategies[j]);
        }
        pairs += net.degree(i);
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Same quantity as [`cooperation_level`] from strategy counts alone, valid
/// on complete graphs.
fn cooperation_level_complete(counts: &[usize; 6], coop: &StrategyMatrix) -> f64 {
    let n: usize = counts.iter().sum();
    let mut total = 0.0;
    for a in Strategy::ALL {
        let na = counts[a.index()] as f64;
        if na == 0.0 {
            continue;
        }
        for b in Strategy::ALL {
            let nb = counts[b.index()] as f64 - if a == b { 1.0 } else { 0.0 };
            total += na * nb * coop.get(a, b);
        }
    }
    total / (n * (n - 1)) as f64
}

/// One step of imitation dynamics with reusable scratch buffers.
pub struct Evolver<'a> {
    net: &'a Network,
    payoff: &'a StrategyMatrix,
    beta: f64,
    rule: UpdateRule,
    complete: bool,
    fitness: Vec<f64>,
    next: Vec<Strategy>,
}

impl<'a> Evolver<'a> {
    pub fn new(net: &'a Network, payoff: &'a StrategyMatrix, beta: f64, rule: UpdateRule) -> Self {
        Self {
            net,
            payoff,
            beta,
            rule,
            complete: net.topology() == Topology::Complete,
            fitness: vec![0.0; net.len()],
            next: Vec::with_capacity(net.len()),
        }
    }

    /// Fitness of every strategy on a complete graph, from counts.
    fn complete_fitness(&self, counts: &[usize; 6]) -> [f64; 6] {
        Strategy::ALL.map(|s| {
            let mut f = -self.payoff.get(s, s);
            for t in Strategy::ALL {
                f += counts[t.index()] as f64 * self.payoff.get(s, t);
            }
            f
        })
    }

    #[inline]
    fn pick_neighbor(&self, node: usize, rng: &mut SimRng) -> Option<usize> {
        let nb = self.net.neighbors(node);
        if nb.is_empty() {
            None
        } else {
            Some(nb[rng.random_range(0..nb.len())])
        }
    }

    pub fn step(&mut self, state: &mut PopulationState, rng: &mut SimRng) {
        match self.rule {
            UpdateRule::Synchronous => self.step_synchronous(state, rng),
            UpdateRule::Asynchronous => self.step_asynchronous(state, rng),
        }
        state.step += 1;
    }

    fn step_synchronous(&mut self, state: &mut PopulationState, rng: &mut SimRng) {
        let n = state.len();
        if self.complete {
            let by_strategy = self.complete_fitness(&state.counts());
            for (f, s) in self.fitness.iter_mut().zip(&state.strategies) {
                *f = by_strategy[s.index()];
            }
        } else {
            for i in 0..n {
                self.fitness[i] = node_fitness(i, state, self.net, self.payoff);
            }
        }
        self.next.clear();
        self.next.extend_from_slice(&state.strategies);
        for i in 0..n {
            let Some(j) = self.pick_neighbor(i, rng) else {
                continue;
            };
            let (own, model) = (state.strategies[i], state.strategies[j]);
            if own == model {
                continue;
            }
            let p = fermi_probability(self.fitness[i], self.fitness[j], self.beta);
            if rng.random::<f64>() < p {
                self.next[i] = model;
            }
        }
        std::mem::swap(&mut state.strategies, &mut self.next);
    }

    fn step_asynchronous(&mut self, state: &mut PopulationState, rng: &mut SimRng) {
        let n = state.len();
        let mut counts = state.counts();
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let Some(j) = self.pick_neighbor(i, rng) else {
                continue;
            };
            let (own, model) = (state.strategies[i], state.strategies[j]);
            if own == model {
                continue;
            }
            let (fi, fj) = if self.complete {
                let by_strategy = self.complete_fitness(&counts);
                (by_strategy[own.index()], by_strategy[model.index()])
            } else {
                (
                    node_fitness(i, state, self.net, self.payoff),
                    node_fitness(j, state, self.net, self.payoff),
                )
            };
            if rng.random::<f64>() < fermi_probability(fi, fj, self.beta) {
                state.strategies[i] = model;
                counts[own.index()] -= 1;
                counts[model.index()] += 1;
            }
        }
    }
}

/// Advances `state` by one step. Allocates scratch space; long runs should
/// hold an [`Evolver`] instead.
pub fn evolution_step(
    state: &mut PopulationState,
    net: &Network,
    payoff: &StrategyMatrix,
    beta: f64,
    rule: UpdateRule,
    rng: &mut SimRng,
) {
    Evolver::new(net, payoff, beta, rule).step(state, rng);
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionRow {
    pub strategy: Strategy,
    /// Fraction of the population playing `strategy`.
    pub share: f64,
    /// Mean fraction of each strategy among the neighbours of a
    /// `strategy`-player; `None` when nobody plays it.
    pub neighbors: Option<[f64; 6]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTable {
    pub rows: Vec<CompositionRow>,
}

impl CompositionTable {
    pub fn row(&self, s: Strategy) -> &CompositionRow {
        &self.rows[s.index()]
    }

    /// Same-strategy neighbour fraction minus population share.
    pub fn assortment(&self, s: Strategy) -> Option<f64> {
        let row = self.row(s);
        row.neighbors.map(|nb| nb[s.index()] - row.share)
    }

    pub fn present(&self) -> impl Iterator<Item = &CompositionRow> {
        self.rows.iter().filter(|r| r.neighbors.is_some())
    }
}

pub fn neighborhood_composition(state: &PopulationState, net: &Network) -> CompositionTable {
    let n = state.len() as f64;
    let mut sums = [[0.0; 6]; 6];
    let mut members = [0usize; 6];
    for (i, &s) in state.strategies.iter().enumerate() {
        members[s.index()] += 1;
        let deg = net.degree(i);
        if deg == 0 {
            continue;
        }
        let mut local = [0usize; 6];
        for &j in net.neighbors(i) {
            local[state.strategies[j].index()] += 1;
        }
        for (acc, c) in sums[s.index()].iter_mut().zip(local) {
            *acc += c as f64 / deg as f64;
        }
    }
    let rows = Strategy::ALL
        .into_iter()
        .map(|s| {
            let k = members[s.index()];
            CompositionRow {
                strategy: s,
                share: k as f64 / n,
                neighbors: (k > 0).then(|| sums[s.index()].map(|x| x / k as f64)),
            }
        })
        .collect();
    CompositionTable { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub step: u64,
    pub frequencies: [f64; 6],
    pub cooperation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub composition: CompositionTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub network_seed: Option<u64>,
    /// Mean strategy frequencies over the measurement window.
    pub frequencies: [f64; 6],
    /// Mean cooperation level over the measurement window.
    pub cooperation: f64,
    pub series: Vec<SeriesPoint>,
    pub snapshots: Vec<Snapshot>,
    /// Composition of the final state.
    pub composition: CompositionTable,
    /// First step at which a single strategy occupied every node.
    pub absorbed_at: Option<u64>,
    pub final_state: PopulationState,
    pub config: SimConfig,
}

impl RunResult {
    pub fn frequency(&self, s: Strategy) -> f64 {
        self.frequencies[s.index()]
    }
}

/// One replicate seeded with `config.seed`. `config.replicates` is ignored.
pub fn run(net: &Network, spec: &GameSpec, config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    spec.validate()?;
    if net.is_empty() {
        return Err(invalid("network has no nodes"));
    }
    let payoff = payoff_matrix(spec);
    let coop = coop_matrix(spec.omega)?;
    let mut rng = rng_from_seed(config.seed);
    let mut state = init_population(net, &config.allowed, &mut rng)?;
    let mut evolver = Evolver::new(net, &payoff, config.beta, config.update_rule);
    let complete = net.topology() == Topology::Complete;
    let cooperation_of = |state: &PopulationState| {
        if complete {
            cooperation_level_complete(&state.counts(), &coop)
        } else {
            cooperation_level(state, &coop, net)
        }
    };

    let first_measured = config.steps - config.measure_window + 1;
    let mut freq_sum = [0.0; 6];
    let mut coop_sum = 0.0;
    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let mut absorbed_at = state.is_monomorphic().then_some(0);
    // Frozen observables once absorbed.
    let mut frozen: Option<([f64; 6], f64)> = None;

    if config.series_every > 0 {
        series.push(SeriesPoint {
            step: 0,
            frequencies: state.frequencies(),
            cooperation: cooperation_of(&state),
        });
    }
    if config.snapshot_steps.contains(&0) {
        snapshots.push(Snapshot {
            step: 0,
            composition: neighborhood_composition(&state, net),
        });
    }

    for t in 1..=config.steps {
        if absorbed_at.is_none() {
            evolver.step(&mut state, &mut rng);
            if state.is_monomorphic() {
                absorbed_at = Some(t);
            }
        } else {
            state.step = t;
        }
        let needs_obs =
            t >= first_measured || (config.series_every > 0 && t % config.series_every == 0);
        if needs_obs {
            let (freqs, c) = match frozen {
                Some(obs) => obs,
                None => {
                    let obs = (state.frequencies(), cooperation_of(&state));
                    if absorbed_at.is_some() {
                        frozen = Some(obs);
                    }
                    obs
                }
            };
            if t >= first_measured {
                for (acc, f) in freq_sum.iter_mut().zip(freqs) {
                    *acc += f;
                }
                coop_sum += c;
            }
            if config.series_every > 0 && t % config.series_every == 0 {
                series.push(SeriesPoint {
                    step: t,
                    frequencies: freqs,
                    cooperation: c,
                });
            }
        }
        if config.snapshot_steps.contains(&t) {
            snapshots.push(Snapshot {
                step: t,
                composition: neighborhood_composition(&state, net),
            });
        }
    }

    let window = config.measure_window as f64;
    Ok(RunResult {
        seed: config.seed,
        network_seed: net.seed(),
        frequencies: freq_sum.map(|s| s / window),
        cooperation: coop_sum / window,
        series,
        snapshots,
        composition: neighborhood_composition(&state, net),
        absorbed_at,
        final_state: state,
        config: config.clone(),
    })
}

/// Seed of replicate `index` under master seed `master`.
pub fn replicate_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, Stream::Replicate, index as u64)
}

/// Runs `config.replicates` independent replicates in parallel. Replicate
/// `r` uses `networks[r % networks.len()]` and [`replicate_seed`]; results
/// come back in replicate order.
pub fn run_replicates(
    networks: &[Network],
    spec: &GameSpec,
    config: &SimConfig,
) -> Result<Vec<RunResult>> {
    config.validate()?;
    if networks.is_empty() {
        return Err(invalid("at least one network is required"));
    }
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let cfg = SimConfig {
                seed: replicate_seed(config.seed, r),
                ..config.clone()
            };
            run(&networks[r % networks.len()], spec, &cfg)
        })
        .collect()
}

/// Mean and sample standard deviation across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub replicates: usize,
    pub frequency_mean: [f64; 6],
    pub frequency_sd: [f64; 6],
    pub cooperation_mean: f64,
    pub cooperation_sd: f64,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn aggregate(results: &[RunResult]) -> Aggregate {
    let mut frequency_mean = [0.0; 6];
    let mut frequency_sd = [0.0; 6];
    for s in 0..6 {
        (frequency_mean[s], frequency_sd[s]) = mean_sd(results.iter().map(|r| r.frequencies[s]));
    }
    let (cooperation_mean, cooperation_sd) = mean_sd(results.iter().map(|r| r.cooperation));
    Aggregate {
        replicates: results.len(),
        frequency_mean,
        frequency_sd,
        cooperation_mean,
        cooperation_sd,
    }
}
