//! Agents on a social graph whose happiness mixes their own payoff with
//! the happiness of their neighbors. The crate solves that happiness for a
//! given payoff vector, finds strategy equilibria of games played on the
//! graph, and evolves the prosociality weights by gradient ascent.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod games;
pub mod graph;
pub mod happiness;
pub mod netgen;
pub mod rng;

pub use error::{FelixError, Result};
pub use graph::SocialGraph;
pub use happiness::{
    solve_happiness, HappinessSolution, Mode, ProsocialityState, Reciprocity, DEFAULT_Q_MAX,
};
