//! Small-mutation-limit Markov chain over monomorphic states.

use super::{fixation_probability, log_fixation_probability, EvoParams};
use crate::error::{invalid, Error, Result};
use crate::game::{Strategy, StrategyMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pub strategies: Vec<Strategy>,
    /// `fixation[i][j]`: a single `strategies[j]` mutant takes over a
    /// `strategies[i]` population. The diagonal holds the neutral `1/N`.
    pub fixation: Vec<Vec<f64>>,
    /// Natural log of `fixation`; finite even where `fixation` underflows.
    pub log_fixation: Vec<Vec<f64>>,
    /// Row-stochastic transition matrix between monomorphic states.
    pub transition: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
    /// Largest `|(πM)_j - π_j|`.
    pub stationarity_residual: f64,
    /// Largest difference between the linear-solve and power-iteration
    /// stationary vectors.
    pub power_check_gap: f64,
}

impl MarkovModel {
    pub fn index_of(&self, s: Strategy) -> Option<usize> {
        self.strategies.iter().position(|&x| x == s)
    }

    /// Fixation probability of a `mutant` in a population of `resident`s.
    pub fn rho(&self, resident: Strategy, mutant: Strategy) -> Option<f64> {
        Some(self.fixation[self.index_of(resident)?][self.index_of(mutant)?])
    }

    pub fn stationary_of(&self, s: Strategy) -> Option<f64> {
        self.index_of(s).map(|i| self.stationary[i])
    }
}

/// Builds the embedded chain over the given strategies.
///
/// Off-diagonal `T[i][j]` is the probability that a `j`-mutant fixates in
/// an `i`-population, divided by `q - 1`.
pub fn build_markov(
    strategies: &[Strategy],
    params: &EvoParams,
    payoffs: &StrategyMatrix,
) -> Result<MarkovModel> {
    params.validate()?;
    let q = strategies.len();
    if q < 2 {
        return Err(invalid("a Markov chain needs at least two strategies"));
    }
    for (i, s) in strategies.iter().enumerate() {
        if strategies[..i].contains(s) {
            return Err(invalid(format!("strategy {s} listed twice")));
        }
    }

    let log_neutral = -(params.population as f64).ln();
    let log_fixation: Vec<Vec<f64>> = strategies
        .iter()
        .map(|&resident| {
            strategies
                .iter()
                .map(|&mutant| {
                    if mutant == resident {
                        log_neutral
                    } else {
                        log_fixation_probability(mutant, resident, params, payoffs)
                    }
                })
                .collect()
        })
        .collect();
    let fixation: Vec<Vec<f64>> = strategies
        .iter()
        .map(|&resident| {
            strategies
                .iter()
                .map(|&mutant| {
                    if mutant == resident {
                        1.0 / params.population as f64
                    } else {
                        fixation_probability(mutant, resident, params, payoffs)
                    }
                })
                .collect()
        })
        .collect();

    let log_scale = -((q - 1) as f64).ln();
    let log_rates: Vec<Vec<f64>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|j| {
                    if i == j {
                        f64::NEG_INFINITY
                    } else {
                        log_fixation[i][j] + log_scale
                    }
                })
                .collect()
        })
        .collect();
    let transition: Vec<Vec<f64>> = log_rates
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut row: Vec<f64> = row.iter().map(|l| l.exp()).collect();
            row[i] = 1.0 - row.iter().sum::<f64>();
            row
        })
        .collect();

    let stationary = stationary_log_gth(&log_rates)?;
    let power = stationary_by_squaring(&transition);
    let power_check_gap = stationary
        .iter()
        .zip(&power)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let stationarity_residual = (0..q)
        .map(|j| {
            let flow: f64 = (0..q).map(|i| stationary[i] * transition[i][j]).sum();
            (flow - stationary[j]).abs()
        })
        .fold(0.0, f64::max);

    Ok(MarkovModel {
        strategies: strategies.to_vec(),
        fixation,
        log_fixation,
        transition,
        stationary,
        stationarity_residual,
        power_check_gap,
    })
}

fn log_add(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

fn log_sum(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, log_add)
}

/// Solves `π Q = 0, Σπ = 1` by Grassmann–Taksar–Heyman elimination on
/// log-transformed rates. GTH only adds, multiplies and divides
/// non-negative numbers, so it runs unchanged in log space; transitions far
/// below the smallest positive double keep their relative weight.
/// `log_rates[i][j]` is the log off-diagonal probability; the diagonal is
/// ignored.
#[allow(clippy::needless_range_loop)]
fn stationary_log_gth(log_rates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let q = log_rates.len();
    let mut a: Vec<Vec<f64>> = log_rates.to_vec();
    for k in (1..q).rev() {
        let s = log_sum((0..k).map(|j| a[k][j]));
        if !s.is_finite() {
            // State k cannot leave towards lower indices: reducible chain.
            return Err(Error::SingularSystem {
                condition: f64::INFINITY,
            });
        }
        for row in a.iter_mut().take(k) {
            row[k] -= s;
        }
        for i in 0..k {
            let aik = a[i][k];
            if aik == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..k {
                if i != j {
                    a[i][j] = log_add(a[i][j], aik + a[k][j]);
                }
            }
        }
    }
    let mut log_pi = vec![0.0; q];
    for j in 1..q {
        log_pi[j] = log_sum((0..j).map(|i| log_pi[i] + a[i][j]));
    }
    let total = log_sum(log_pi.iter().copied());
    if !total.is_finite() {
        return Err(Error::SingularSystem {
            condition: f64::INFINITY,
        });
    }
    Ok(log_pi.into_iter().map(|l| (l - total).exp()).collect())
}

/// Power iteration accelerated by repeated squaring: `M^(2^k)` converges to a
/// matrix whose rows all equal the stationary vector.
#[allow(clippy::needless_range_loop)]
fn stationary_by_squaring(transition: &[Vec<f64>]) -> Vec<f64> {
    let q = transition.len();
    let mut m: Vec<Vec<f64>> = transition.to_vec();
    for _ in 0..2048 {
        let mut next = vec![vec![0.0; q]; q];
        for i in 0..q {
            for k in 0..q {
                let mik = m[i][k];
                if mik == 0.0 {
                    continue;
                }
                for j in 0..q {
                    next[i][j] += mik * m[k][j];
                }
            }
            let sum: f64 = next[i].iter().sum();
            next[i].iter_mut().for_each(|x| *x /= sum);
        }
        m = next;
        let spread = (0..q)
            .map(|j| {
                let col = m.iter().map(|row| row[j]);
                let hi = col.clone().fold(f64::NEG_INFINITY, f64::max);
                let lo = col.fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max);
        if spread < 1e-15 {
            break;
        }
    }
    (0..q)
        .map(|j| m.iter().map(|row| row[j]).sum::<f64>() / q as f64)
        .collect()
}

/// Edges `A -> B` where a `B` mutant is more likely to take over an `A`
/// population than the reverse. Ties give no edge.
pub fn transition_directions(model: &MarkovModel) -> Vec<(Strategy, Strategy)> {
    let q = model.strategies.len();
    let mut edges = Vec::new();
    for i in 0..q {
        for j in 0..q {
            if i != j && model.log_fixation[i][j] > model.log_fixation[j][i] {
                edges.push((model.strategies[i], model.strategies[j]));
            }
        }
    }
    edges
}
