//! Round-by-round simulation of a single iterated encounter.
//!
//! This is the behavioural definition of the strategies. The closed-form
//! payoff matrix in [`super::matrix`] is checked against it.

use super::{GameSpec, GuiltThreshold, Strategy};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Cooperate,
    Defect,
}

impl Action {
    pub fn is_cooperate(self) -> bool {
        self == Action::Cooperate
    }
}

/// Whether a defection by `focal` against `opponent` counts as a wrongdoing.
///
/// Non-social guilt fires after every defection. Social guilt fires only
/// when the co-player is not an unemotional defector.
///
/// # Panics
///
/// If `focal` is unemotional (C or D); those never evaluate guilt.
pub fn guilt_trigger(focal: Strategy, opponent: Strategy) -> bool {
    assert!(
        focal.is_guilt_prone(),
        "guilt_trigger called for unemotional strategy {focal}"
    );
    !focal.is_social() || opponent != Strategy::D
}

/// One round, both players. Index 0 is the focal player, 1 the opponent.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub actions: [Action; 2],
    pub base_payoff: [f64; 2],
    pub guilt_before: [u32; 2],
    pub guilt_after: [u32; 2],
    /// Guilt reached the threshold and was alleviated this round.
    pub guilt_episode: [bool; 2],
    pub gamma_paid: [f64; 2],
    pub gamma_s_paid: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncounterTrace {
    pub players: [Strategy; 2],
    pub rounds: Vec<RoundRecord>,
    pub total_base: [f64; 2],
    pub total_gamma: [f64; 2],
    pub total_gamma_s: [f64; 2],
    /// `(total payoff - total costs) / omega`.
    pub average_payoff: [f64; 2],
    /// Fraction of rounds each player cooperated.
    pub cooperation: [f64; 2],
}

impl EncounterTrace {
    pub fn guilt_episodes(&self, player: usize) -> usize {
        self.rounds
            .iter()
            .filter(|r| r.guilt_episode[player])
            .count()
    }
}

#[derive(Debug, Clone, Copy)]
struct PlayerState {
    strategy: Strategy,
    guilt: u32,
    switched: bool,
}

impl PlayerState {
    fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            guilt: 0,
            switched: false,
        }
    }

    fn action(&self) -> Action {
        if self.strategy == Strategy::C || (self.strategy.is_adaptive() && self.switched) {
            Action::Cooperate
        } else {
            Action::Defect
        }
    }
}

/// Plays `spec.omega` rounds between `focal` and `opponent`.
pub fn simulate_encounter(
    focal: Strategy,
    opponent: Strategy,
    spec: &GameSpec,
) -> Result<EncounterTrace> {
    spec.validate()?;
    let pay = spec.payoffs;
    let mut players = [PlayerState::new(focal), PlayerState::new(opponent)];
    let mut rounds = Vec::with_capacity(spec.omega as usize);
    let mut total_base = [0.0; 2];
    let mut total_gamma = [0.0; 2];
    let mut total_gamma_s = [0.0; 2];
    let mut cooperated = [0u32; 2];

    for round in 0..spec.omega {
        let actions = [players[0].action(), players[1].action()];
        let base_payoff = [0, 1].map(|me| match (actions[me], actions[1 - me]) {
            (Action::Cooperate, Action::Cooperate) => pay.r,
            (Action::Cooperate, Action::Defect) => pay.s,
            (Action::Defect, Action::Cooperate) => pay.t,
            (Action::Defect, Action::Defect) => pay.p,
        });
        let guilt_before = [players[0].guilt, players[1].guilt];
        let mut gamma_paid = [0.0; 2];
        let mut gamma_s_paid = [0.0; 2];
        let mut guilt_episode = [false; 2];

        for me in 0..2 {
            let other = players[1 - me].strategy;
            let player = &mut players[me];
            if actions[me].is_cooperate() {
                cooperated[me] += 1;
                continue;
            }
            if player.strategy.guilt_threshold() == GuiltThreshold::Infinite {
                continue;
            }
            if player.strategy.is_social() {
                gamma_s_paid[me] = spec.guilt.gamma_s;
            }
            if guilt_trigger(player.strategy, other) {
                player.guilt += 1;
                // Threshold zero: alleviate every unit straight away.
                gamma_paid[me] = spec.guilt.gamma * f64::from(player.guilt);
                player.guilt = 0;
                guilt_episode[me] = true;
                if player.strategy.is_adaptive() {
                    player.switched = true;
                }
            }
        }

        for me in 0..2 {
            total_base[me] += base_payoff[me];
            total_gamma[me] += gamma_paid[me];
            total_gamma_s[me] += gamma_s_paid[me];
        }
        rounds.push(RoundRecord {
            round,
            actions,
            base_payoff,
            guilt_before,
            guilt_after: [players[0].guilt, players[1].guilt],
            guilt_episode,
            gamma_paid,
            gamma_s_paid,
        });
    }

    let omega = f64::from(spec.omega);
    let average_payoff =
        [0, 1].map(|me| (total_base[me] - total_gamma[me] - total_gamma_s[me]) / omega);
    let cooperation = cooperated.map(|n| f64::from(n) / omega);
    Ok(EncounterTrace {
        players: [focal, opponent],
        rounds,
        total_base,
        total_gamma,
        total_gamma_s,
        average_payoff,
        cooperation,
    })
}
