//! Evolution of social and non-social guilt in the iterated prisoner's dilemma.
//!
//! The crate is organised bottom-up:
//!
//! * [`game`] defines the six guilt strategies, the round-by-round encounter
//!   simulator and the 6×6 payoff / cooperation matrices derived from it.
//! * [`wellmixed`] holds the exact finite-population analytics: Fermi
//!   imitation, fixation probabilities, the small-mutation Markov chain and
//!   risk dominance.
//! * [`network`] builds the interaction graphs (complete, periodic square
//!   lattice, Barabási–Albert scale-free).
//! * [`abm`] runs stochastic imitation dynamics on any of those graphs.

pub mod abm;
mod error;
pub mod game;
pub mod network;
pub mod seed;
pub mod wellmixed;

pub use abm::{PopulationState, RunResult, SimConfig, UpdateRule};
pub use error::{Error, Result};
pub use game::{
    coop_matrix, donation_payoffs, payoff_matrix, simulate_encounter, DonationParams, GameSpec,
    GuiltParams, PayoffEntries, Strategy, StrategyMatrix,
};
pub use network::{BaSpec, Network, Topology};
pub use wellmixed::{EvoParams, MarkovModel};
