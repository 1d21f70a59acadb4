//! Closed-form analysis of the two-player games with `p_12 = q_1`,
//! `p_21 = q_2`.
//!
//! All predicates compare happiness gains against [`TIE_TOL`]; at
//! indifference the status-quo strategy (and the Nash label) wins.

use super::{self_interest, TIE_TOL};
use crate::error::{FelixError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// Where prosociality ends up: both selfish (Nash), one fully prosocial
/// (asymmetric), or both fully prosocial (benevolent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    Nash,
    Asymmetric { altruist: Player },
    Benevolent,
}

impl EquilibriumKind {
    pub fn code(&self) -> &'static str {
        match self {
            EquilibriumKind::Nash => "NE",
            EquilibriumKind::Asymmetric { altruist: Player::One } => "AE1",
            EquilibriumKind::Asymmetric { altruist: Player::Two } => "AE2",
            EquilibriumKind::Benevolent => "BE",
        }
    }

    /// Same outcome with the players relabeled.
    pub fn swapped(self) -> Self {
        match self {
            EquilibriumKind::Asymmetric { altruist } => EquilibriumKind::Asymmetric {
                altruist: altruist.other(),
            },
            k => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumLabel {
    pub kind: EquilibriumKind,
    /// Strategy profile played at the current prosociality levels.
    pub profile: [f64; 2],
}

fn check_q(q1: f64, q2: f64) -> Result<()> {
    for q in [q1, q2] {
        if !(0.0..1.0).contains(&q) {
            return Err(FelixError::InvalidParameter(format!(
                "prosociality must lie in [0, 1), got {q}"
            )));
        }
    }
    Ok(())
}

/// Happiness gain of player `q_self` from cooperating in the two-player PD.
fn pd_cooperation_gain(q_self: f64, q_other: f64, c: f64) -> f64 {
    (q_self * (1.0 - q_other) - c * (1.0 - q_self)) / (1.0 - q_self * q_other)
}

/// Two-player prisoner's dilemma `π_i = s_-i - c s_i`.
///
/// With `a <= b` the two prosociality levels: Nash if `c >= b(1-a)/(1-b)`,
/// benevolent if `c < a(1-b)/(1-a)`, otherwise asymmetric with the more
/// prosocial player as the altruist.
pub fn pd2_classify(q1: f64, q2: f64, c: f64) -> Result<EquilibriumLabel> {
    check_q(q1, q2)?;
    if !(c > 0.0 && c < 1.0) {
        return Err(FelixError::InvalidParameter(format!(
            "cooperation cost must lie in (0, 1), got {c}"
        )));
    }
    let s1 = pd_cooperation_gain(q1, q2, c) > TIE_TOL;
    let s2 = pd_cooperation_gain(q2, q1, c) > TIE_TOL;
    let kind = match (s1, s2) {
        (false, false) => EquilibriumKind::Nash,
        (true, true) => EquilibriumKind::Benevolent,
        (true, false) => EquilibriumKind::Asymmetric { altruist: Player::One },
        (false, true) => EquilibriumKind::Asymmetric { altruist: Player::Two },
    };
    Ok(EquilibriumLabel {
        kind,
        profile: [f64::from(u8::from(s1)), f64::from(u8::from(s2))],
    })
}

/// The two cost thresholds `(a(1-b)/(1-a), b(1-a)/(1-b))` with
/// `a = min(q1, q2)`, `b = max(q1, q2)`.
pub fn pd2_thresholds(q1: f64, q2: f64) -> (f64, f64) {
    let (a, b) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
    (a * (1.0 - b) / (1.0 - a), b * (1.0 - a) / (1.0 - b))
}

/// Pure equilibria `[s_1, s_2]` (hawk = 1) of the hawk-dove game with
/// happiness objectives, in ascending order.
pub fn hawkdove_solve(q1: f64, q2: f64) -> Result<Vec<[f64; 2]>> {
    check_q(q1, q2)?;
    let mut out = Vec::with_capacity(2);
    if self_interest(q2, q1) >= -TIE_TOL {
        out.push([0.0, 1.0]);
    }
    if self_interest(q1, q2) >= -TIE_TOL {
        out.push([1.0, 0.0]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimatumOutcome {
    /// Share of the pie kept by the proposer.
    pub kept: f64,
    /// 1 if the responder accepts.
    pub accepted: f64,
    pub u1: f64,
    pub u2: f64,
    /// Where prosociality is driven from here.
    pub limit: EquilibriumKind,
}

/// Happiness of both players in the ultimatum game.
pub fn ultimatum_happiness(q1: f64, q2: f64, kept: f64, accepted: f64) -> (f64, f64) {
    let d = 1.0 - q1 * q2;
    let u1 = (q1 * (1.0 - q2) + (1.0 - 2.0 * q1 + q1 * q2) * kept) / d * accepted;
    let u2 = (1.0 - q2 - (1.0 - 2.0 * q2 + q1 * q2) * kept) / d * accepted;
    (u1, u2)
}

/// Ultimatum game (or dictator game when `refusable` is false; both give
/// the same prediction). The responder always accepts; the proposer keeps
/// everything unless `q_1 > 1/(2 - q_2)`, in which case she keeps nothing.
pub fn ultimatum_solve(q1: f64, q2: f64, refusable: bool) -> Result<UltimatumOutcome> {
    check_q(q1, q2)?;
    let _ = refusable;
    let kept = if self_interest(q1, q2) > TIE_TOL { 1.0 } else { 0.0 };
    let (u1, u2) = ultimatum_happiness(q1, q2, kept, 1.0);
    let altruist = if kept == 1.0 { Player::Two } else { Player::One };
    Ok(UltimatumOutcome {
        kept,
        accepted: 1.0,
        u1,
        u2,
        limit: EquilibriumKind::Asymmetric { altruist },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationOutcome {
    pub profiles: Vec<[f64; 2]>,
    pub limit: EquilibriumKind,
}

/// `(1 - 2 q_1 + q_1 q_2) / (1 - q_1 q_2)`, the weight of the preference
/// term in player 1's happiness.
pub fn coordination_coefficient(q1: f64, q2: f64) -> f64 {
    self_interest(q1, q2)
}

/// Coordination game: both coordinated profiles stay equilibria for any
/// prosociality; the player crossing `1/(2 - q_other)` becomes the altruist.
pub fn coordination_classify(q1: f64, q2: f64, eps: f64) -> Result<CoordinationOutcome> {
    check_q(q1, q2)?;
    if !(0.0..0.5).contains(&eps) {
        return Err(FelixError::InvalidParameter(format!(
            "coordination preference must lie in [0, 1/2), got {eps}"
        )));
    }
    let limit = if self_interest(q1, q2) < -TIE_TOL {
        EquilibriumKind::Asymmetric { altruist: Player::One }
    } else if self_interest(q2, q1) < -TIE_TOL {
        EquilibriumKind::Asymmetric { altruist: Player::Two }
    } else {
        EquilibriumKind::Nash
    };
    Ok(CoordinationOutcome {
        profiles: vec![[-1.0, -1.0], [1.0, 1.0]],
        limit,
    })
}
