//! Payoff rules and closed-form results for the games played on the graph.

pub mod commons;
pub mod npd;
pub mod two_player;

use crate::error::{FelixError, Result};
use crate::graph::SocialGraph;

pub use commons::{ResourceFn, Vspec};
pub use npd::NpdParams;
pub use two_player::{EquilibriumKind, EquilibriumLabel, Player};

/// Happiness differences at or below this size count as indifference.
pub const TIE_TOL: f64 = 1e-9;

/// `1 / (2 - q_other)`: above this level a player prefers handing a unit of
/// payoff to the other player over keeping it.
pub fn altruism_threshold(q_other: f64) -> f64 {
    1.0 / (2.0 - q_other)
}

/// Happiness gained by a player with prosociality `q_self` when one unit of
/// payoff is moved from the other player to her, in a two-player game:
/// `(1 - q_self (2 - q_other)) / (1 - q_self q_other)`.
///
/// Negative exactly when `q_self > altruism_threshold(q_other)`.
pub fn self_interest(q_self: f64, q_other: f64) -> f64 {
    (1.0 - q_self * (2.0 - q_other)) / (1.0 - q_self * q_other)
}

/// A game with finite per-node strategy sets, played on a graph.
///
/// A node's payoff may depend only on its own strategy and on those of its
/// neighbors; equilibrium search relies on this to update payoffs locally.
pub trait Game {
    fn validate(&self, graph: &SocialGraph) -> Result<()>;

    /// Strategy set of node `i`, in preference order for ties.
    fn strategies(&self, graph: &SocialGraph, i: usize) -> Vec<f64>;

    fn payoff(&self, graph: &SocialGraph, profile: &[f64], i: usize) -> f64;

    fn payoffs(&self, graph: &SocialGraph, profile: &[f64]) -> Vec<f64> {
        (0..graph.n()).map(|i| self.payoff(graph, profile, i)).collect()
    }
}

/// The games available to the equilibrium and dynamics engines.
#[derive(Debug, Clone, PartialEq)]
pub enum GameSpec {
    /// Networked prisoner's dilemma `π_i = Σ_{j∈∂i} s_j - c s_i + w_i`.
    PrisonersDilemma(NpdParams),
    /// No strategic choice; `π_i = w_i`.
    WealthOnly { wealth: Vec<f64> },
    /// `π_1 = 1 + s_1 - s_2 - 2 s_1 s_2`, hawk = 1.
    HawkDove,
    /// Node 0 keeps share `s_1` of a unit pie; node 1 accepts (1) or refuses
    /// (0). Without refusal this is the dictator game.
    Ultimatum { refusable: bool, grid: usize },
    /// `π_1 = (s_1 + s_2) ε + s_1 s_2`, `π_2 = -(s_1 + s_2) ε + s_1 s_2`,
    /// `s_i = ±1`.
    Coordination { eps: f64 },
}

fn require_pair(graph: &SocialGraph, name: &str) -> Result<()> {
    if graph.n() == 2 && graph.has_edge(0, 1) {
        Ok(())
    } else {
        Err(FelixError::InvalidParameter(format!(
            "{name} is a two-player game and needs the single-edge graph"
        )))
    }
}

impl Game for GameSpec {
    fn validate(&self, graph: &SocialGraph) -> Result<()> {
        match self {
            GameSpec::PrisonersDilemma(p) => p.validate(graph.n()),
            GameSpec::WealthOnly { wealth } => {
                if wealth.len() != graph.n() || wealth.iter().any(|w| !w.is_finite()) {
                    Err(FelixError::InvalidParameter(
                        "wealth must have one finite value per node".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            GameSpec::HawkDove => require_pair(graph, "hawk-dove"),
            GameSpec::Ultimatum { grid, .. } => {
                require_pair(graph, "ultimatum")?;
                if *grid < 2 {
                    return Err(FelixError::InvalidParameter(
                        "ultimatum offer grid needs at least 2 points".into(),
                    ));
                }
                Ok(())
            }
            GameSpec::Coordination { eps } => {
                require_pair(graph, "coordination")?;
                if !(0.0..0.5).contains(eps) {
                    return Err(FelixError::InvalidParameter(format!(
                        "coordination preference must lie in [0, 1/2), got {eps}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn strategies(&self, _graph: &SocialGraph, i: usize) -> Vec<f64> {
        match self {
            GameSpec::PrisonersDilemma(_) | GameSpec::HawkDove => vec![0.0, 1.0],
            GameSpec::WealthOnly { .. } => vec![0.0],
            GameSpec::Ultimatum { refusable, grid } => match (i, refusable) {
                (0, _) => (0..*grid).map(|k| k as f64 / (*grid - 1) as f64).collect(),
                (_, true) => vec![0.0, 1.0],
                (_, false) => vec![1.0],
            },
            GameSpec::Coordination { .. } => vec![-1.0, 1.0],
        }
    }

    fn payoff(&self, graph: &SocialGraph, s: &[f64], i: usize) -> f64 {
        match self {
            GameSpec::PrisonersDilemma(p) => npd::npd_payoff(graph, s, p, i),
            GameSpec::WealthOnly { wealth } => wealth[i],
            GameSpec::HawkDove => {
                let (me, other) = (s[i], s[1 - i]);
                1.0 + me - other - 2.0 * me * other
            }
            GameSpec::Ultimatum { .. } => {
                let (kept, accepted) = (s[0], s[1]);
                if i == 0 {
                    kept * accepted
                } else {
                    (1.0 - kept) * accepted
                }
            }
            GameSpec::Coordination { eps } => {
                let sign = if i == 0 { 1.0 } else { -1.0 };
                sign * (s[0] + s[1]) * eps + s[0] * s[1]
            }
        }
    }
}
