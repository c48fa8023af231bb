//! Exact analytics for finite well-mixed populations under pairwise
//! comparison (Fermi) imitation, in the limit of rare mutations.

mod markov;
mod risk;

use crate::error::{invalid, Result};
use crate::game::{Strategy, StrategyMatrix};

pub use markov::{build_markov, transition_directions, MarkovModel};
pub use risk::{closed_form_conditions, risk_dominant, RiskCondition, RiskConditions, RiskOutcome};

/// Population size and intensity of selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvoParams {
    pub population: usize,
    pub beta: f64,
}

impl EvoParams {
    pub fn new(population: usize, beta: f64) -> Result<Self> {
        let params = Self { population, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(invalid(format!(
                "population size N must be >= 2 (got {})",
                self.population
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid(format!(
                "selection intensity beta must be >= 0 (got {})",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Probability that an agent with fitness `f_a` adopts the strategy of one
/// with fitness `f_b`: `1 / (1 + exp(-beta (f_b - f_a)))`.
#[inline]
pub fn fermi_probability(f_a: f64, f_b: f64, beta: f64) -> f64 {
    let x = beta * (f_b - f_a);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Average payoff of an `a`-player when `k` of the `N` agents play `a` and
/// the rest play `b`. The payoff of the `b`-players is
/// `group_payoff(b, a, N - k, ..)`.
pub fn group_payoff(
    a: Strategy,
    b: Strategy,
    k: usize,
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> Result<f64> {
    let n = params.population;
    if k < 1 || k > n - 1 {
        return Err(invalid(format!(
            "k must lie in [1, N-1] = [1, {}] (got {k})",
            n - 1
        )));
    }
    Ok(group_payoff_unchecked(a, b, k, n, payoffs))
}

#[inline]
fn group_payoff_unchecked(
    a: Strategy,
    b: Strategy,
    k: usize,
    n: usize,
    payoffs: &StrategyMatrix,
) -> f64 {
    ((k - 1) as f64 * payoffs.get(a, a) + (n - k) as f64 * payoffs.get(a, b)) / (n - 1) as f64
}

/// `Π_A(k) - Π_B(k)` for `1 <= k <= N-1`.
#[inline]
fn payoff_gap(a: Strategy, b: Strategy, k: usize, n: usize, payoffs: &StrategyMatrix) -> f64 {
    group_payoff_unchecked(a, b, k, n, payoffs) - group_payoff_unchecked(b, a, n - k, n, payoffs)
}

/// Probabilities `(T+, T-)` that the number of `a`-players moves from `k`
/// to `k + 1` or `k - 1` in one imitation event.
pub fn step_probabilities(
    k: usize,
    a: Strategy,
    b: Strategy,
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> Result<(f64, f64)> {
    params.validate()?;
    let n = params.population;
    if k > n {
        return Err(invalid(format!(
            "k must lie in [0, N] = [0, {n}] (got {k})"
        )));
    }
    if k == 0 || k == n {
        return Ok((0.0, 0.0));
    }
    let pa = group_payoff_unchecked(a, b, k, n, payoffs);
    let pb = group_payoff_unchecked(b, a, n - k, n, payoffs);
    let mixing = (n - k) as f64 / n as f64 * (k as f64 / n as f64);
    Ok((
        mixing * fermi_probability(pb, pa, params.beta),
        mixing * fermi_probability(pa, pb, params.beta),
    ))
}

/// Probability that a single `mutant` takes over a population of `resident`s.
///
/// Uses the telescoped ratio `T-(j)/T+(j) = exp(-beta (Π_A(j) - Π_B(j)))`
/// and sums the partial products in log space.
pub fn fixation_probability(
    mutant: Strategy,
    resident: Strategy,
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> f64 {
    let (max, scaled) = fixation_terms(mutant, resident, params, payoffs);
    (-max).exp() / scaled
}

/// Natural log of [`fixation_probability`]; finite even when the
/// probability itself underflows.
pub fn log_fixation_probability(
    mutant: Strategy,
    resident: Strategy,
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> f64 {
    let (max, scaled) = fixation_terms(mutant, resident, params, payoffs);
    -max - scaled.ln()
}

/// `1/ρ = exp(max) * scaled`.
fn fixation_terms(
    mutant: Strategy,
    resident: Strategy,
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> (f64, f64) {
    let n = params.population;
    let beta = params.beta;
    // exponents[i] = log of the i-th partial product; the leading 0 is the "1 +".
    let mut exponents = Vec::with_capacity(n);
    exponents.push(0.0);
    let mut acc = 0.0;
    for j in 1..n {
        acc -= beta * payoff_gap(mutant, resident, j, n, payoffs);
        exponents.push(acc);
    }
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
    (max, scaled)
}
