//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;

use guiltevo_cli::{compute, config, Settings};
use guiltevo_core::abm::{aggregate, run, run_replicates};
use guiltevo_core::network::{build_complete, build_lattice, build_scale_free, degree_summary};
use guiltevo_core::seed::{derive_seed, rng_from_seed, Stream};
use guiltevo_core::wellmixed::{
    build_markov, closed_form_conditions, fixation_probability, risk_dominant,
    transition_directions, RiskOutcome,
};
use guiltevo_core::{
    payoff_matrix, simulate_encounter, BaSpec, EvoParams, GameSpec, GuiltParams, PayoffEntries,
    SimConfig, Strategy, UpdateRule,
};

use Strategy::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!(
            "{what} took {:.2}s, limit {limit_secs}s",
            elapsed.as_secs_f64()
        )
    })
}

/// Random donation game with costs on the scales used throughout.
fn random_spec(rng: &mut impl Rng) -> GameSpec {
    let c = rng.random_range(0.1..3.0);
    let b = c + rng.random_range(0.05..5.0);
    let omega = rng.random_range(1..=30);
    let gamma = rng.random_range(0.0..10.0);
    let gamma_s = if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.0..3.0)
    };
    GameSpec::donation(b, c, omega, gamma, gamma_s).unwrap()
}

// ------------------------------------------------------------ test oracle

/// Per-round average payoff of `me` against `other`, played out one round
/// at a time straight from the strategy definitions.
fn oracle_average(me: Strategy, other: Strategy, spec: &GameSpec) -> f64 {
    // (guilt-prone, adaptive, social)
    fn traits(s: Strategy) -> (bool, bool, bool) {
        match s {
            C | D => (false, false, false),
            Dgdn => (true, false, false),
            Dgcn => (true, true, false),
            Dgds => (true, false, true),
            Dgcs => (true, true, true),
        }
    }
    let PayoffEntries { t, r, p, s } = spec.payoffs;
    let GuiltParams { gamma, gamma_s } = spec.guilt;
    let players = [me, other];
    let mut cooperating = [me == C, other == C];
    let mut earned = [0.0; 2];
    for _ in 0..spec.omega {
        let acts = cooperating;
        for k in 0..2 {
            earned[k] += match (acts[k], acts[1 - k]) {
                (true, true) => r,
                (true, false) => s,
                (false, true) => t,
                (false, false) => p,
            };
            let (prone, adaptive, social) = traits(players[k]);
            if !acts[k] && prone {
                if social {
                    earned[k] -= gamma_s;
                }
                if !social || players[1 - k] != D {
                    earned[k] -= gamma;
                    if adaptive {
                        cooperating[k] = true;
                    }
                }
            }
        }
    }
    earned[0] / f64::from(spec.omega)
}

// ------------------------------------------------------------ criteria

fn matrix_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xACCE);
    let specs = 600;
    let mut worst: f64 = 0.0;
    for _ in 0..specs {
        let spec = random_spec(&mut rng);
        let m = payoff_matrix(&spec);
        for a in Strategy::ALL {
            for b in Strategy::ALL {
                let trace = simulate_encounter(a, b, &spec).map_err(|e| e.to_string())?;
                let oracle = oracle_average(a, b, &spec);
                let gap = (m.get(a, b) - trace.average_payoff[0])
                    .abs()
                    .max((oracle - m.get(a, b)).abs());
                worst = worst.max(gap);
                ensure(gap <= 1e-12, || {
                    format!("{a} vs {b} differs by {gap:e} at {spec:?}")
                })?;
            }
        }
    }
    within(start.elapsed(), 5.0, "matrix check")?;
    Ok(format!(
        "{specs} specs x 36 entries, max gap {worst:e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn neutral_fixation() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(7);
    let m = payoff_matrix(&random_spec(&mut rng));
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for n in [10, 100, 1000] {
        let params = EvoParams::new(n, 0.0).unwrap();
        for a in Strategy::ALL {
            for b in Strategy::ALL {
                if a == b {
                    continue;
                }
                let rho = fixation_probability(a, b, &params, &m);
                let gap = (rho - 1.0 / n as f64).abs();
                worst = worst.max(gap);
                pairs += 1;
                ensure(gap <= 1e-12, || format!("rho({a} in {b}, N={n}) = {rho}"))?;
            }
        }
    }
    within(start.elapsed(), 1.0, "neutral fixation")?;
    Ok(format!("{pairs} cases, max gap {worst:e}"))
}

fn social_adaptive_neutrality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for b in [1.5, 2.0, 4.0] {
        for gamma in [0.0, 0.5, 1.0, 4.0, 8.0] {
            for omega in [1, 10, 25] {
                let spec = GameSpec::donation(b, 1.0, omega, gamma, 0.0).unwrap();
                let m = payoff_matrix(&spec);
                for n in [10, 100, 1000] {
                    for beta in [0.1, 1.0, 10.0] {
                        let params = EvoParams::new(n, beta).unwrap();
                        for (mutant, resident) in [(Dgcs, Dgcn), (Dgcn, Dgcs)] {
                            let rho = fixation_probability(mutant, resident, &params, &m);
                            let gap = (rho - 1.0 / n as f64).abs();
                            worst = worst.max(gap);
                            cases += 1;
                            ensure(gap <= 1e-12, || {
                                format!("rho = {rho} at b={b} gamma={gamma} N={n} beta={beta}")
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} cases, max gap {worst:e}"))
}

fn closed_form_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xC10_5ED);
    let (mut points, mut compared, mut skipped) = (0, 0, 0);
    while points < 200 {
        let spec = random_spec(&mut rng);
        points += 1;
        let m = payoff_matrix(&spec);
        let conditions = closed_form_conditions(&spec);
        for cond in &conditions.conditions {
            if cond.margin.abs() < 1e-9 {
                skipped += 1;
                continue;
            }
            let numeric =
                risk_dominant(cond.favored, cond.other, &m) == RiskOutcome::Favors(cond.favored);
            compared += 1;
            ensure(numeric == cond.holds, || {
                format!(
                    "{} closed form says {} but the matrix says {numeric} at {spec:?}",
                    cond.name, cond.holds
                )
            })?;
        }
        let dgcs_beats_d = conditions.get("DGCS>D").unwrap().holds;
        ensure(
            conditions.cyclic == (dgcs_beats_d && spec.guilt.gamma_s > 0.0),
            || "cycle flag".into(),
        )?;
    }
    within(start.elapsed(), 1.0, "closed-form check")?;
    Ok(format!(
        "{points} points, {compared} comparisons, {skipped} boundary cases skipped"
    ))
}

fn markov_directions() -> Outcome {
    // Guilt-cost columns sit well inside each regime of the DGCS-vs-D
    // condition, where the finite-population direction is unambiguous.
    let params = EvoParams::new(100, 1.0).unwrap();
    let payoffs = PayoffEntries::new(2.0, 1.0, 0.0, -1.0).unwrap();
    let mut checked = 0;
    for gamma in [0.5, 4.0, 10.0] {
        for gamma_s in [0.0, 0.5, 1.0] {
            let spec =
                GameSpec::new(payoffs, 10, GuiltParams::new(gamma, gamma_s).unwrap()).unwrap();
            let model = build_markov(&Strategy::ALL, &params, &payoff_matrix(&spec))
                .map_err(|e| e.to_string())?;
            let edges = transition_directions(&model);
            let has = |from, to| edges.contains(&(from, to));
            let claims = [
                ("C->D", has(C, D), true),
                ("DGCN->D", has(Dgcn, D), true),
                ("DGCS->DGCN", has(Dgcs, Dgcn), gamma_s > 0.0),
                ("DGCN->DGCS", has(Dgcn, Dgcs), false),
                ("D->DGCS", has(D, Dgcs), gamma + 11.0 * gamma_s < 9.0),
                ("DGCS->D", has(Dgcs, D), gamma + 11.0 * gamma_s > 9.0),
            ];
            for (name, got, want) in claims {
                checked += 1;
                ensure(got == want, || {
                    format!("{name} is {got}, expected {want} at gamma={gamma}, gamma_s={gamma_s}")
                })?;
            }
        }
    }
    Ok(format!("{checked} arrow claims over 9 parameter columns"))
}

fn wellmixed_peak() -> Outcome {
    let start = Instant::now();
    let params = EvoParams::new(100, 1.0).unwrap();
    let dgcs_at = |gamma: f64| -> Result<f64, String> {
        let spec = GameSpec::donation(2.0, 1.0, 10, gamma, 0.0).unwrap();
        let model = build_markov(&Strategy::ALL, &params, &payoff_matrix(&spec))
            .map_err(|e| e.to_string())?;
        Ok(model.stationary_of(Dgcs).unwrap())
    };
    let (low, peak, high) = (dgcs_at(0.2)?, dgcs_at(1.0)?, dgcs_at(8.0)?);
    ensure(peak > low && peak > high, || {
        format!("DGCS: {low} at 0.2, {peak} at 1, {high} at 8")
    })?;
    within(start.elapsed(), 30.0, "peak check")?;
    Ok(format!(
        "DGCS stationary share {low:.4} / {peak:.4} / {high:.4} at gamma 0.2 / 1 / 8"
    ))
}

fn desk_config(replicates: usize, allowed: Vec<Strategy>) -> SimConfig {
    SimConfig {
        steps: 100_000,
        measure_window: 10_000,
        replicates,
        beta: 1.0,
        update_rule: UpdateRule::default(),
        allowed,
        seed: 0,
        series_every: 0,
        snapshot_steps: Vec::new(),
    }
}

fn lattice_dominance() -> Outcome {
    let start = Instant::now();
    let net = build_lattice(30).unwrap();
    let spec = GameSpec::donation(2.0, 1.0, 10, 4.0, 0.0).unwrap();
    let results = run_replicates(&[net], &spec, &desk_config(5, Strategy::ALL.to_vec()))
        .map_err(|e| e.to_string())?;
    let agg = aggregate(&results);
    let dgcs = agg.frequency_mean[Dgcs.index()];
    ensure(dgcs > 0.5, || format!("mean DGCS frequency {dgcs}"))?;
    within(start.elapsed(), 600.0, "lattice runs")?;
    Ok(format!(
        "mean DGCS frequency {dgcs:.3} over 5 replicates, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn complete_graph_defection() -> Outcome {
    let start = Instant::now();
    let spec = GameSpec::donation(2.0, 1.0, 10, 1.0, 0.0).unwrap();
    let net = build_complete(100).unwrap();
    let results =
        run_replicates(&[net], &spec, &desk_config(5, vec![C, D])).map_err(|e| e.to_string())?;
    let d = aggregate(&results).frequency_mean[D.index()];
    ensure(d > 0.9, || format!("mean D frequency {d}"))?;
    let model = build_markov(
        &[C, D],
        &EvoParams::new(100, 1.0).unwrap(),
        &payoff_matrix(&spec),
    )
    .map_err(|e| e.to_string())?;
    let analytic_d = model.stationary_of(D).unwrap();
    ensure(analytic_d > 0.5, || {
        format!("analytic D share {analytic_d}")
    })?;
    within(start.elapsed(), 120.0, "complete-graph runs")?;
    Ok(format!(
        "ABM D frequency {d:.3}, analytic D share {analytic_d:.3}"
    ))
}

fn scale_free_structure() -> Outcome {
    let start = Instant::now();
    let base = derive_seed(0, Stream::Network, 0);
    let mut means = Vec::new();
    for k in 0..20 {
        let net = build_scale_free(&BaSpec::new(1000, 2, base + k)).map_err(|e| e.to_string())?;
        net.validate().map_err(|e| format!("network {k}: {e}"))?;
        ensure(net.is_connected(), || {
            format!("network {k} is disconnected")
        })?;
        for u in 0..net.len() {
            for &v in net.neighbors(u) {
                ensure(net.neighbors(v).binary_search(&u).is_ok(), || {
                    format!("edge {u}-{v} is one-sided")
                })?;
            }
        }
        let mean = degree_summary(&net).mean;
        ensure((3.9..=4.0).contains(&mean), || {
            format!("network {k} mean degree {mean}")
        })?;
        means.push(mean);
    }
    within(start.elapsed(), 10.0, "network construction")?;
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("20 networks, mean degree in [{lo}, {hi}]"))
}

fn simulate_determinism() -> Outcome {
    let settings = Settings {
        topology: Some("lattice".into()),
        side: Some(12),
        gamma: Some(3.0),
        gamma_s: Some(0.1),
        steps: Some(2000),
        window: Some(200),
        replicates: Some(4),
        seed: Some(42),
        timeseries: Some(true),
        series_every: Some(100),
        ..Default::default()
    };
    let first = compute("simulate", &settings).map_err(|e| e.to_string())?;
    let again = compute(
        "simulate",
        &Settings {
            jobs: Some(1),
            ..settings.clone()
        },
    )
    .map_err(|e| e.to_string())?;
    let manifest = first.get("manifest.toml").unwrap();
    let replayed_settings = config::parse_str(manifest, "simulate")?;
    let replayed = compute("simulate", &replayed_settings).map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in first.names().filter(|n| n.ends_with(".csv")) {
        files += 1;
        ensure(first.get(name) == again.get(name), || {
            format!("{name} differs between runs")
        })?;
        ensure(first.get(name) == replayed.get(name), || {
            format!("{name} differs after manifest replay")
        })?;
    }
    ensure(files == 3, || format!("expected 3 CSVs, got {files}"))?;
    Ok("run_summary, aggregate and timeseries identical across reruns, thread counts and manifest replay".into())
}

fn clustering_signature() -> Outcome {
    let start = Instant::now();
    let net = build_lattice(30).unwrap();
    let spec = GameSpec::donation(4.0, 1.0, 10, 1.0, 1.0).unwrap();
    let mut mixed = 0;
    let mut share_sum = [0.0; 6];
    let mut same_sum = [0.0; 6];
    let mut appearances = [0usize; 6];
    for seed in 0..30 {
        if mixed >= 8 {
            break;
        }
        let config = SimConfig {
            seed,
            ..desk_config(1, Strategy::ALL.to_vec())
        };
        let result = run(&net, &spec, &config).map_err(|e| e.to_string())?;
        if result.final_state.is_monomorphic() {
            continue;
        }
        mixed += 1;
        for row in result.composition.present() {
            if !row.strategy.is_guilt_prone() {
                continue;
            }
            let i = row.strategy.index();
            share_sum[i] += row.share;
            same_sum[i] += row.neighbors.unwrap()[i];
            appearances[i] += 1;
        }
    }
    ensure(mixed >= 5, || {
        format!("only {mixed} mixed outcomes in 30 seeds")
    })?;
    let mut report = Vec::new();
    for s in Strategy::ALL {
        let i = s.index();
        if appearances[i] == 0 {
            continue;
        }
        let share = share_sum[i] / appearances[i] as f64;
        let same = same_sum[i] / appearances[i] as f64;
        ensure(same >= share, || {
            format!("{s}: same-strategy neighbours {same} < share {share}")
        })?;
        report.push(format!("{s} {same:.2} vs {share:.2}"));
    }
    ensure(!report.is_empty(), || {
        "no guilt-prone strategy survived".into()
    })?;
    Ok(format!(
        "{mixed} mixed runs; {}; {:.1}s",
        report.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "matrix equals round-by-round oracle",
            matrix_oracle_equivalence,
        ),
        ("neutral fixation at zero selection", neutral_fixation),
        (
            "DGCS and DGCN neutral without social cost",
            social_adaptive_neutrality,
        ),
        (
            "closed-form risk dominance agrees with matrix",
            closed_form_agreement,
        ),
        ("well-mixed transition directions", markov_directions),
        ("well-mixed DGCS peak near gamma = c", wellmixed_peak),
        ("lattice DGCS dominance at b=2, gamma=4", lattice_dominance),
        ("complete graph {C,D} defects", complete_graph_defection),
        ("scale-free network structure", scale_free_structure),
        ("simulate output is deterministic", simulate_determinism),
        (
            "lattice clustering of guilt-prone strategies",
            clustering_signature,
        ),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
