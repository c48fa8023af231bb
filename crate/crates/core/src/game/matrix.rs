use std::fmt::Write as _;
use std::ops::Index;

use super::{simulate_encounter, GameSpec, Strategy};
use crate::error::Result;

/// A 6×6 table indexed by (row/focal strategy, column/opponent strategy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyMatrix([[f64; 6]; 6]);

impl StrategyMatrix {
    pub fn from_rows(rows: [[f64; 6]; 6]) -> Self {
        Self(rows)
    }

    pub fn from_fn(mut f: impl FnMut(Strategy, Strategy) -> f64) -> Self {
        let mut rows = [[0.0; 6]; 6];
        for row in Strategy::ALL {
            for col in Strategy::ALL {
                rows[row.index()][col.index()] = f(row, col);
            }
        }
        Self(rows)
    }

    #[inline]
    pub fn get(&self, row: Strategy, col: Strategy) -> f64 {
        self.0[row.index()][col.index()]
    }

    pub fn rows(&self) -> &[[f64; 6]; 6] {
        &self.0
    }

    pub fn row(&self, row: Strategy) -> &[f64; 6] {
        &self.0[row.index()]
    }

    pub fn max_abs_diff(&self, other: &StrategyMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with a header row and a leading label column, in matrix order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy");
        for s in Strategy::ALL {
            out.push(',');
            out.push_str(s.label());
        }
        out.push('\n');
        for row in Strategy::ALL {
            out.push_str(row.label());
            for col in Strategy::ALL {
                write!(out, ",{}", self.get(row, col)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl Index<(Strategy, Strategy)> for StrategyMatrix {
    type Output = f64;

    fn index(&self, (row, col): (Strategy, Strategy)) -> &f64 {
        &self.0[row.index()][col.index()]
    }
}

/// Per-round average payoff of the row strategy against the column strategy,
/// written out entry by entry in closed form.
pub fn payoff_matrix(spec: &GameSpec) -> StrategyMatrix {
    let GameSpec {
        payoffs,
        omega,
        guilt,
    } = *spec;
    let (t, r, p, s) = (payoffs.t, payoffs.r, payoffs.p, payoffs.s);
    let (g, gs) = (guilt.gamma, guilt.gamma_s);
    let om = f64::from(omega);
    let th = om - 1.0;

    // One defection that ends in a switch, then `th` rounds of `later`.
    let first_then = |first: f64, later: f64| (first + later * th) / om;

    StrategyMatrix([
        // C
        [r, s, s, first_then(s, r), s, first_then(s, r)],
        // D
        [t, p, p, first_then(p, t), p, p],
        // DGDN
        [
            t - g,
            p - g,
            p - g,
            first_then(p, t) - g,
            p - g,
            first_then(p, t) - g,
        ],
        // DGCN
        [
            first_then(t - g, r),
            first_then(p - g, s),
            first_then(p - g, s),
            first_then(p - g, r),
            first_then(p - g, s),
            first_then(p - g, r),
        ],
        // DGDS
        [
            t - g - gs,
            p - gs,
            p - g - gs,
            first_then(p, t) - g - gs,
            p - g - gs,
            first_then(p, t) - g - gs,
        ],
        // DGCS
        [
            first_then(t - g - gs, r),
            p - gs,
            first_then(p - g - gs, s),
            first_then(p - g - gs, r),
            first_then(p - g - gs, s),
            first_then(p - g - gs, r),
        ],
    ])
}

/// Fraction of rounds the row strategy cooperates against the column strategy.
pub fn coop_matrix(omega: u32) -> Result<StrategyMatrix> {
    // Actions do not depend on the payoff values, only on the strategies.
    let spec = GameSpec::donation(2.0, 1.0, omega, 1.0, 1.0)?;
    let mut rows = [[0.0; 6]; 6];
    for row in Strategy::ALL {
        for col in Strategy::ALL {
            rows[row.index()][col.index()] = simulate_encounter(row, col, &spec)?.cooperation[0];
        }
    }
    Ok(StrategyMatrix(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Strategy::*;

    fn oracle_matrix(spec: &GameSpec) -> StrategyMatrix {
        StrategyMatrix::from_fn(|a, b| simulate_encounter(a, b, spec).unwrap().average_payoff[0])
    }

    #[test]
    fn named_entries() {
        let spec = GameSpec::donation(2.0, 1.0, 10, 4.0, 0.5).unwrap();
        let m = payoff_matrix(&spec);
        assert_eq!(m[(C, C)], 1.0);
        assert!((m[(D, Dgcn)] - 1.8).abs() < 1e-15);
        assert!(m.max_abs_diff(&oracle_matrix(&spec)) < 1e-12);
    }

    #[test]
    fn single_round_hides_adaptivity() {
        let spec = GameSpec::donation(3.0, 1.0, 1, 2.0, 0.7).unwrap();
        let m = payoff_matrix(&spec);
        assert_eq!(m.row(Dgcn), m.row(Dgdn));
        assert_eq!(m.row(Dgcs), m.row(Dgds));
    }

    #[test]
    fn zero_social_cost_differs_only_against_defector() {
        let spec = GameSpec::donation(4.0, 1.0, 7, 2.5, 0.0).unwrap();
        let m = payoff_matrix(&spec);
        for col in Strategy::ALL {
            let same = col != D;
            assert_eq!(m[(Dgds, col)] == m[(Dgdn, col)], same, "DGDS/DGDN vs {col}");
            assert_eq!(m[(Dgcs, col)] == m[(Dgcn, col)], same, "DGCS/DGCN vs {col}");
        }
    }

    #[test]
    fn unemotional_rows_ignore_guilt_costs() {
        let a = payoff_matrix(&GameSpec::donation(2.0, 1.0, 10, 0.0, 0.0).unwrap());
        let b = payoff_matrix(&GameSpec::donation(2.0, 1.0, 10, 9.0, 3.0).unwrap());
        assert_eq!(a.row(C), b.row(C));
        assert_eq!(a.row(D), b.row(D));
    }

    #[test]
    fn cooperation_fractions() {
        let m = coop_matrix(10).unwrap();
        assert_eq!(m[(C, D)], 1.0);
        assert_eq!(m[(Dgcs, D)], 0.0);
        assert!((m[(Dgcn, D)] - 0.9).abs() < 1e-15);
        for col in Strategy::ALL {
            assert_eq!(m[(C, col)], 1.0);
            assert_eq!(m[(D, col)], 0.0);
            assert_eq!(m[(Dgdn, col)], 0.0);
            assert_eq!(m[(Dgds, col)], 0.0);
            assert!((m[(Dgcn, col)] - 0.9).abs() < 1e-15);
            let expected = if col == D { 0.0 } else { 0.9 };
            assert!((m[(Dgcs, col)] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = payoff_matrix(&GameSpec::donation(2.0, 1.0, 10, 0.0, 0.0).unwrap()).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "strategy,C,D,DGDN,DGCN,DGDS,DGCS");
        assert!(lines[1].starts_with("C,1,-1,-1,"));
    }
}
