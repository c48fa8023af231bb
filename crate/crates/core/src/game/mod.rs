//! Strategies, game parameters and the pairwise payoff matrices.

mod encounter;
mod matrix;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

pub use encounter::{guilt_trigger, simulate_encounter, Action, EncounterTrace, RoundRecord};
pub use matrix::{coop_matrix, payoff_matrix, StrategyMatrix};

/// Per-round prisoner's dilemma payoffs for the row player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffEntries {
    /// Temptation to defect.
    pub t: f64,
    /// Reward for mutual cooperation.
    pub r: f64,
    /// Punishment for mutual defection.
    pub p: f64,
    /// Sucker's payoff.
    pub s: f64,
}

impl PayoffEntries {
    /// Checked constructor: requires `T > R > P > S` and `2R > T + S`.
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        let entries = Self { t, r, p, s };
        entries.validate()?;
        Ok(entries)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { t, r, p, s } = *self;
        if ![t, r, p, s].iter().all(|v| v.is_finite()) {
            return Err(invalid("payoff entries must be finite"));
        }
        if !(t > r && r > p && p > s) {
            return Err(invalid(format!(
                "prisoner's dilemma requires T > R > P > S (got T={t}, R={r}, P={p}, S={s})"
            )));
        }
        if 2.0 * r <= t + s {
            return Err(invalid(format!(
                "iterated dilemma requires 2R > T + S (got 2R={}, T+S={})",
                2.0 * r,
                t + s
            )));
        }
        Ok(())
    }
}

/// Donation-game parameterisation of the dilemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DonationParams {
    pub b: f64,
    pub c: f64,
}

impl DonationParams {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        let params = Self { b, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.c.is_finite()) {
            return Err(invalid("donation benefit and cost must be finite"));
        }
        if self.c <= 0.0 {
            return Err(invalid(format!(
                "donation game requires c > 0 (got c={})",
                self.c
            )));
        }
        if self.b <= self.c {
            return Err(invalid(format!(
                "donation game requires b > c (got b={}, c={})",
                self.b, self.c
            )));
        }
        Ok(())
    }
}

/// Maps a donation game onto dilemma entries: `T = b, R = b - c, P = 0, S = -c`.
pub fn donation_payoffs(params: DonationParams) -> Result<PayoffEntries> {
    params.validate()?;
    let DonationParams { b, c } = params;
    Ok(PayoffEntries {
        t: b,
        r: b - c,
        p: 0.0,
        s: -c,
    })
}

/// Guilt alleviation cost and the extra cost of being social.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuiltParams {
    /// Paid once per guilt episode.
    pub gamma: f64,
    /// Paid by social strategies in every round they defect.
    pub gamma_s: f64,
}

impl GuiltParams {
    pub fn new(gamma: f64, gamma_s: f64) -> Result<Self> {
        let params = Self { gamma, gamma_s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid(format!(
                "guilt cost gamma must be >= 0 (got {})",
                self.gamma
            )));
        }
        if !(self.gamma_s.is_finite() && self.gamma_s >= 0.0) {
            return Err(invalid(format!(
                "social cost gamma_s must be >= 0 (got {})",
                self.gamma_s
            )));
        }
        Ok(())
    }
}

/// Everything needed to evaluate one iterated encounter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpec {
    pub payoffs: PayoffEntries,
    /// Number of rounds per encounter.
    pub omega: u32,
    pub guilt: GuiltParams,
}

impl GameSpec {
    pub fn new(payoffs: PayoffEntries, omega: u32, guilt: GuiltParams) -> Result<Self> {
        let spec = Self {
            payoffs,
            omega,
            guilt,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor for the donation game.
    pub fn donation(b: f64, c: f64, omega: u32, gamma: f64, gamma_s: f64) -> Result<Self> {
        let payoffs = donation_payoffs(DonationParams::new(b, c)?)?;
        Self::new(payoffs, omega, GuiltParams::new(gamma, gamma_s)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.payoffs.validate()?;
        self.guilt.validate()?;
        if self.omega < 1 {
            return Err(invalid("number of rounds omega must be >= 1"));
        }
        Ok(())
    }
}

/// Guilt threshold: either guilty after the first wrongdoing, or never.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuiltThreshold {
    Zero,
    Infinite,
}

/// The six strategies, in payoff-matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Unemotional cooperator.
    C,
    /// Unemotional defector.
    D,
    /// Guilt-prone, non-adaptive, non-social defector.
    Dgdn,
    /// Guilt-prone, adaptive, non-social.
    Dgcn,
    /// Guilt-prone, non-adaptive, social defector.
    Dgds,
    /// Guilt-prone, adaptive, social.
    Dgcs,
}

impl Strategy {
    pub const COUNT: usize = 6;

    pub const ALL: [Strategy; 6] = [
        Strategy::C,
        Strategy::D,
        Strategy::Dgdn,
        Strategy::Dgcn,
        Strategy::Dgds,
        Strategy::Dgcs,
    ];

    /// Zero-based position in matrix order.
    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    /// One-based identifier (C=1 ... DGCS=6).
    pub const fn id(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub const fn label(self) -> &'static str {
        match self {
            Strategy::C => "C",
            Strategy::D => "D",
            Strategy::Dgdn => "DGDN",
            Strategy::Dgcn => "DGCN",
            Strategy::Dgds => "DGDS",
            Strategy::Dgcs => "DGCS",
        }
    }

    pub const fn guilt_threshold(self) -> GuiltThreshold {
        match self {
            Strategy::C | Strategy::D => GuiltThreshold::Infinite,
            _ => GuiltThreshold::Zero,
        }
    }

    pub const fn is_guilt_prone(self) -> bool {
        matches!(self.guilt_threshold(), GuiltThreshold::Zero)
    }

    /// Switches to cooperation after its first guilt episode.
    pub const fn is_adaptive(self) -> bool {
        matches!(self, Strategy::Dgcn | Strategy::Dgcs)
    }

    /// Only feels guilty when the co-player is not an unemotional defector.
    pub const fn is_social(self) -> bool {
        matches!(self, Strategy::Dgds | Strategy::Dgcs)
    }

    pub const fn initial_action(self) -> Action {
        match self {
            Strategy::C => Action::Cooperate,
            _ => Action::Defect,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        Strategy::ALL
            .into_iter()
            .find(|st| st.label().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| invalid(format!("unknown strategy '{trimmed}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn donation_mapping() {
        let p = donation_payoffs(DonationParams { b: 2.0, c: 1.0 }).unwrap();
        assert_eq!(
            p,
            PayoffEntries {
                t: 2.0,
                r: 1.0,
                p: 0.0,
                s: -1.0
            }
        );
        let p = donation_payoffs(DonationParams { b: 4.0, c: 1.0 }).unwrap();
        assert_eq!(
            p,
            PayoffEntries {
                t: 4.0,
                r: 3.0,
                p: 0.0,
                s: -1.0
            }
        );
    }

    #[test]
    fn donation_rejects_b_equal_c() {
        let err = donation_payoffs(DonationParams { b: 2.0, c: 2.0 }).unwrap_err();
        assert!(err.to_string().contains("b > c"), "{err}");
        let err = DonationParams::new(2.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("c > 0"), "{err}");
    }

    #[test]
    fn payoff_entries_ordering() {
        assert!(PayoffEntries::new(2.0, 1.0, 0.0, -1.0).is_ok());
        assert!(PayoffEntries::new(1.0, 2.0, 0.0, -1.0).is_err());
        // T + S too large: alternating would beat mutual cooperation.
        let err = PayoffEntries::new(5.0, 1.0, 0.0, -1.0).unwrap_err();
        assert!(err.to_string().contains("2R > T + S"));
    }

    #[test]
    fn negative_costs_rejected() {
        assert!(GuiltParams::new(-0.1, 0.0).is_err());
        assert!(GuiltParams::new(0.0, -1.0).is_err());
        assert!(GameSpec::donation(2.0, 1.0, 0, 0.0, 0.0).is_err());
    }

    #[test]
    fn strategy_attributes() {
        for s in Strategy::ALL {
            if !s.is_guilt_prone() {
                assert!(!s.is_adaptive() && !s.is_social());
            }
            assert_eq!(Strategy::from_index(s.index()), Some(s));
            assert_eq!(s.label().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!(Strategy::Dgcs.id(), 6);
        assert_eq!(Strategy::C.id(), 1);
        assert!("dgcn".parse::<Strategy>().is_ok());
        assert!("X".parse::<Strategy>().is_err());
    }
}
