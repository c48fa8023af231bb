//! Risk dominance, generic and in closed form for the guilt strategies.

use crate::game::{GameSpec, Strategy, StrategyMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskOutcome {
    Favors(Strategy),
    Neutral,
}

/// Large-population comparison `π_AA + π_AB` vs `π_BA + π_BB`.
pub fn risk_dominant(a: Strategy, b: Strategy, payoffs: &StrategyMatrix) -> RiskOutcome {
    let lhs = payoffs.get(a, a) + payoffs.get(a, b);
    let rhs = payoffs.get(b, a) + payoffs.get(b, b);
    if lhs > rhs {
        RiskOutcome::Favors(a)
    } else if rhs > lhs {
        RiskOutcome::Favors(b)
    } else {
        RiskOutcome::Neutral
    }
}

/// One closed-form inequality: `favored` risk-dominates `other` iff
/// `margin > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCondition {
    pub name: &'static str,
    pub favored: Strategy,
    pub other: Strategy,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskConditions {
    pub conditions: Vec<RiskCondition>,
    /// DGCS beats D while DGCN beats DGCS and D beats DGCN.
    pub cyclic: bool,
}

impl RiskConditions {
    pub fn get(&self, name: &str) -> Option<&RiskCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Evaluates the closed-form risk-dominance inequalities for DGCS and DGCN.
///
/// Written for a general dilemma; in the donation game `(T-R+P-S)/2 = c`
/// and `R-P = b-c`. Inequalities whose derivation divides by `Ω-1` are
/// kept multiplied through so the single-round game comes out as a tie.
pub fn closed_form_conditions(spec: &GameSpec) -> RiskConditions {
    let pay = spec.payoffs;
    let omega = f64::from(spec.omega);
    let theta = omega - 1.0;
    let gamma = spec.guilt.gamma;
    let gamma_s = spec.guilt.gamma_s;
    let half_gap = (pay.t - pay.r + pay.p - pay.s) / 2.0;

    use Strategy::*;
    let mk = |name, favored, other, margin: f64| RiskCondition {
        name,
        favored,
        other,
        margin,
        holds: margin > 0.0,
    };
    let vs_d = mk(
        "DGCS>D",
        Dgcs,
        D,
        theta * (pay.r - pay.p) - gamma - (omega + 1.0) * gamma_s,
    );
    let conditions = vec![
        mk(
            "DGCS>DGDS",
            Dgcs,
            Dgds,
            theta * (gamma + gamma_s - half_gap),
        ),
        mk("DGCS>C", Dgcs, C, half_gap - gamma - gamma_s),
        mk(
            "DGCS>DGDN",
            Dgcs,
            Dgdn,
            theta * gamma - gamma_s - theta * half_gap,
        ),
        vs_d.clone(),
        mk("DGCN>DGCS", Dgcn, Dgcs, gamma_s),
        // Positive for any dilemma unless Ω = 1 and γ = 0.
        mk("D>DGCN", D, Dgcn, theta * half_gap + gamma),
    ];
    let cyclic = vs_d.holds && gamma_s > 0.0;
    RiskConditions { conditions, cyclic }
}
