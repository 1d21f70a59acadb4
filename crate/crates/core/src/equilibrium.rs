//! Strategy equilibria at fixed prosociality: every node plays a best
//! response in terms of its own happiness.

use std::collections::HashSet;

use crate::error::{FelixError, Result};
use crate::games::commons::ResourceFn;
use crate::games::npd::cg_pd_threshold;
use crate::games::{Game, TIE_TOL};
use crate::graph::SocialGraph;
use crate::happiness::{reciprocity_matrix, solve_happiness, ProsocialityState, Reciprocity};
use crate::happiness::DEFAULT_Q_MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Defaults to `10 n`.
    pub max_sweeps: Option<usize>,
    pub order: SweepOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    /// The sweep revisited an earlier profile or ran out of sweeps.
    pub cycle_detected: bool,
}

fn check_profile<G: Game + ?Sized>(game: &G, graph: &SocialGraph, profile: &[f64]) -> Result<()> {
    if profile.len() != graph.n() {
        return Err(FelixError::InvalidParameter(format!(
            "profile has {} entries for {} nodes",
            profile.len(),
            graph.n()
        )));
    }
    for (i, s) in profile.iter().enumerate() {
        if !game.strategies(graph, i).contains(s) {
            return Err(FelixError::InvalidParameter(format!(
                "strategy {s} is not available to node {i}"
            )));
        }
    }
    Ok(())
}

/// Change in `u_i` if node `i` switches to `candidate`, using that only `i`
/// and its neighbors see their payoffs move.
fn deviation_gain<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    recip: &Reciprocity,
    profile: &mut [f64],
    payoffs: &[f64],
    i: usize,
    candidate: f64,
) -> f64 {
    let current = profile[i];
    profile[i] = candidate;
    let mut gain = 0.0;
    for j in std::iter::once(i).chain(graph.neighbors(i).iter().copied()) {
        let delta = game.payoff(graph, profile, j) - payoffs[j];
        gain += recip.b(i, j) * recip.own_weight(j) * delta;
    }
    profile[i] = current;
    gain
}

/// Best response of node `i`: the candidate with the largest gain, kept only
/// if it beats the current strategy by more than [`TIE_TOL`].
fn best_response<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    recip: &Reciprocity,
    profile: &mut [f64],
    payoffs: &[f64],
    i: usize,
) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for s in game.strategies(graph, i) {
        if s == profile[i] {
            continue;
        }
        let gain = deviation_gain(game, graph, recip, profile, payoffs, i, s);
        if gain > TIE_TOL && best.is_none_or(|(_, g)| gain > g) {
            best = Some((s, gain));
        }
    }
    best.map(|(s, _)| s)
}

/// Best-response iteration with status-quo tie-breaking.
pub fn best_response_sweep<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    state: &ProsocialityState,
    s_init: &[f64],
    opts: SweepOptions,
) -> Result<EquilibriumResult> {
    let recip = reciprocity_matrix(graph, state)?;
    sweep_with(game, graph, &recip, s_init, opts)
}

/// [`best_response_sweep`] with a precomputed `B`.
pub fn sweep_with<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    recip: &Reciprocity,
    s_init: &[f64],
    opts: SweepOptions,
) -> Result<EquilibriumResult> {
    game.validate(graph)?;
    check_profile(game, graph, s_init)?;
    let n = graph.n();
    let max_sweeps = opts.max_sweeps.unwrap_or(10 * n).max(1);
    let order: Vec<usize> = match opts.order {
        SweepOrder::Ascending => (0..n).collect(),
        SweepOrder::Descending => (0..n).rev().collect(),
    };

    let mut profile = s_init.to_vec();
    let mut payoffs = game.payoffs(graph, &profile);
    let mut seen = HashSet::new();
    seen.insert(profile_key(&profile));

    for sweep in 1..=max_sweeps {
        let mut changed = false;
        for &i in &order {
            if let Some(s) = best_response(game, graph, recip, &mut profile, &payoffs, i) {
                profile[i] = s;
                payoffs[i] = game.payoff(graph, &profile, i);
                for &j in graph.neighbors(i) {
                    payoffs[j] = game.payoff(graph, &profile, j);
                }
                changed = true;
            }
        }
        if !changed {
            return Ok(EquilibriumResult {
                profile,
                converged: true,
                sweeps: sweep,
                cycle_detected: false,
            });
        }
        if !seen.insert(profile_key(&profile)) {
            return Ok(EquilibriumResult {
                profile,
                converged: false,
                sweeps: sweep,
                cycle_detected: true,
            });
        }
    }
    Ok(EquilibriumResult {
        profile,
        converged: false,
        sweeps: max_sweeps,
        cycle_detected: true,
    })
}

fn profile_key(profile: &[f64]) -> Vec<u64> {
    profile.iter().map(|s| s.to_bits()).collect()
}

/// Runs the sweep in both node orders. Returns both profiles when they differ,
/// which signals multiple equilibria.
pub fn order_dependence<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    state: &ProsocialityState,
    s_init: &[f64],
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let recip = reciprocity_matrix(graph, state)?;
    let up = sweep_with(game, graph, &recip, s_init, SweepOptions::default())?;
    let down = sweep_with(
        game,
        graph,
        &recip,
        s_init,
        SweepOptions {
            order: SweepOrder::Descending,
            ..Default::default()
        },
    )?;
    Ok((up.profile != down.profile).then_some((up.profile, down.profile)))
}

/// Checks that no node can raise its happiness by more than [`TIE_TOL`]
/// through a unilateral change, solving every deviation from scratch.
pub fn verify_fixed_point<G: Game + ?Sized>(
    game: &G,
    graph: &SocialGraph,
    state: &ProsocialityState,
    profile: &[f64],
) -> Result<bool> {
    check_profile(game, graph, profile)?;
    let base = solve_happiness(graph, state, &game.payoffs(graph, profile))?;
    let mut trial = profile.to_vec();
    for i in 0..graph.n() {
        for s in game.strategies(graph, i) {
            if s == profile[i] {
                continue;
            }
            trial[i] = s;
            let u = solve_happiness(graph, state, &game.payoffs(graph, &trial))?.u;
            trial[i] = profile[i];
            if u[i] - base.u[i] > TIE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest `n_c` whose `n_c`-th largest prosociality reaches
/// `cg_pd_threshold(n, n_c, c)`; 0 if none does.
///
/// `q_sorted` must be in descending order. The threshold for `n_c = n` is 1,
/// which a node at the cap [`DEFAULT_Q_MAX`] is taken to reach.
pub fn graphical_nc(q_sorted: &[f64], n: usize, c: f64) -> Result<usize> {
    if q_sorted.len() != n {
        return Err(FelixError::InvalidParameter(format!(
            "expected {n} prosociality values, got {}",
            q_sorted.len()
        )));
    }
    if q_sorted.windows(2).any(|w| w[0] < w[1]) {
        return Err(FelixError::InvalidParameter(
            "prosociality values must be sorted in descending order".into(),
        ));
    }
    let mut best = 0;
    for n_c in 1..=n {
        let threshold = cg_pd_threshold(n, n_c, c)?.min(DEFAULT_Q_MAX);
        if q_sorted[n_c - 1] >= threshold {
            best = n_c;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TocOptions {
    /// Stop once the estimated distance of every effort to the fixed point,
    /// extrapolated from the contraction rate of successive sweeps, is below
    /// this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for TocOptions {
    fn default() -> Self {
        TocOptions {
            tolerance: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

/// Maximizes `f(x) = V(x + rest)(alpha x + beta)` over `x >= 0`.
fn toc_best_response<V: ResourceFn + ?Sized>(v: &V, rest: f64, alpha: f64, beta: f64) -> f64 {
    let f = |x: f64| v.value(x + rest) * (alpha * x + beta);
    let df = |x: f64| v.slope(x + rest) * (alpha * x + beta) + alpha * v.value(x + rest);
    if df(0.0) <= 0.0 {
        return 0.0;
    }
    // golden section on [0, 10 S_0] to isolate the maximum
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 10.0 * v.s0());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-6 * v.s0() {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    // refine on the derivative
    let (mut lo, mut hi) = ((a - 1e-6 * v.s0()).max(0.0), b + 1e-6 * v.s0());
    if df(lo) <= 0.0 || df(hi) >= 0.0 {
        return 0.5 * (a + b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if df(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Efforts at which every node of the complete graph maximizes its own
/// happiness in the commons game `π_i = s_i V(S)`, with generalized
/// prosociality `q`.
pub fn toc_numeric_equilibrium<V: ResourceFn + ?Sized>(
    graph: &SocialGraph,
    q: &[f64],
    v: &V,
    opts: TocOptions,
) -> Result<Vec<f64>> {
    if !graph.is_complete() {
        return Err(FelixError::InvalidGraph(
            "the commons solver needs the complete graph".into(),
        ));
    }
    let state = ProsocialityState::generalized(graph, q.to_vec(), DEFAULT_Q_MAX)?;
    let recip = reciprocity_matrix(graph, &state)?;
    let n = graph.n();
    // start from the selfish equilibrium
    let selfish_total = crate::games::commons::toc_total_effort(v, n as f64)?;
    let mut s = vec![selfish_total / n as f64; n];
    let mut total: f64 = s.iter().sum();

    let mut last_moved = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let alpha = recip.b(i, i) * recip.own_weight(i);
            let beta: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| recip.b(i, j) * recip.own_weight(j) * s[j])
                .sum();
            let rest = total - s[i];
            let x = toc_best_response(v, rest, alpha, beta);
            moved = moved.max((x - s[i]).abs());
            total = rest + x;
            s[i] = x;
        }
        total = s.iter().sum();
        let rate = moved / last_moved;
        last_moved = moved;
        if moved == 0.0 || (rate < 1.0 && moved * (1.0 + rate / (1.0 - rate)) < opts.tolerance) {
            return Ok(s);
        }
    }
    Err(FelixError::NonConvergence {
        what: "commons best-response iteration".into(),
        iterations: opts.max_sweeps,
    })
}
