//! Gradient adaptation of prosociality. Strategies are re-solved to an
//! equilibrium after every update, so they move on a faster timescale than
//! the weights.

use crate::equilibrium::{sweep_with, SweepOptions};
use crate::error::{FelixError, Result};
use crate::games::Game;
use crate::graph::SocialGraph;
use crate::happiness::{
    reciprocity_matrix, solve_with, Mode, ProsocialityState, Reciprocity, DEFAULT_Q_MAX,
};
use crate::rng::{stream, uniform, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// `q' = (1 - λ) q + λ ∂u/∂q`.
    #[default]
    Mixed,
    /// `q' = q + λ ∂u/∂q`, an Euler step of `dq/dt = ∂u/∂q`.
    Ascent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub learning_rate: f64,
    pub q_max: f64,
    pub max_steps: usize,
    /// Largest per-step change in any weight that still counts as at rest.
    pub tolerance: f64,
    /// Consecutive at-rest steps required to stop.
    pub window: usize,
    pub mode: Mode,
    pub rule: UpdateRule,
    pub seed: u64,
    /// Keep every `record_every`-th step; 0 keeps only the first and last.
    pub record_every: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            learning_rate: 0.01,
            q_max: DEFAULT_Q_MAX,
            max_steps: 100_000,
            tolerance: 1e-8,
            window: 10,
            mode: Mode::Generalized,
            rule: UpdateRule::Mixed,
            seed: 0,
            record_every: 1,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(FelixError::InvalidParameter(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(FelixError::InvalidParameter("tolerance must be positive".into()));
        }
        if !(self.q_max > 0.0 && self.q_max < 1.0) {
            return Err(FelixError::InvalidParameter(format!(
                "q_max must lie in (0, 1), got {}",
                self.q_max
            )));
        }
        if self.window == 0 || self.max_steps == 0 {
            return Err(FelixError::InvalidParameter(
                "window and max_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Initial total prosociality per node. Isolated nodes always start at 0.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    /// One node at `q0`, everybody else selfish.
    SingleSeed { node: usize, q0: f64 },
    Explicit(Vec<f64>),
}

impl InitSpec {
    pub fn draw(&self, graph: &SocialGraph, q_max: f64, seed: u64, replicate: u64) -> Result<Vec<f64>> {
        let n = graph.n();
        let mut q = match self {
            InitSpec::Constant(v) => vec![*v; n],
            InitSpec::Uniform { lo, hi } => {
                if !(lo <= hi) {
                    return Err(FelixError::InvalidParameter(format!(
                        "empty interval [{lo}, {hi}]"
                    )));
                }
                let mut rng = stream(seed, Purpose::Prosociality, replicate);
                (0..n).map(|_| uniform(&mut rng, *lo, *hi)).collect()
            }
            InitSpec::SingleSeed { node, q0 } => {
                if *node >= n {
                    return Err(FelixError::InvalidParameter(format!(
                        "seed node {node} out of range for {n} nodes"
                    )));
                }
                let mut q = vec![0.0; n];
                q[*node] = *q0;
                q
            }
            InitSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(FelixError::InvalidParameter(format!(
                        "expected {n} initial values, got {}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if let Some(x) = q.iter().find(|x| !(0.0..=q_max).contains(*x)) {
            return Err(FelixError::InvalidProsociality(format!(
                "initial value {x} outside [0, {q_max}]"
            )));
        }
        for i in graph.isolated_nodes() {
            q[i] = 0.0;
        }
        Ok(q)
    }
}

/// Starting state for `mode`: generalized weights, or selective rows spread
/// evenly over the neighbors.
pub fn initial_state(graph: &SocialGraph, q: Vec<f64>, mode: Mode, q_max: f64) -> Result<ProsocialityState> {
    match mode {
        Mode::Generalized => ProsocialityState::generalized(graph, q, q_max),
        Mode::Selective => {
            let rows = (0..graph.n())
                .map(|i| {
                    let k = graph.degree(i);
                    vec![q[i] / k.max(1) as f64; k]
                })
                .collect();
            ProsocialityState::selective(graph, rows, q_max)
        }
    }
}

/// One point of a trajectory: prosociality, the equilibrium it induces, and
/// the resulting payoffs and happiness.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    pub payoffs: Vec<f64>,
    pub u: Vec<f64>,
    /// `∂u_i/∂q_i` under an even spread over neighbors.
    pub gradient: Vec<f64>,
}

/// Prosociality state with its equilibrium already solved.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: ProsocialityState,
    pub recip: Reciprocity,
    pub profile: Vec<f64>,
    pub payoffs: Vec<f64>,
    pub u: Vec<f64>,
    pub equilibrium_converged: bool,
}

impl Snapshot {
    /// Solves the equilibrium at `state`, starting the sweep from `s_start`.
    pub fn settle<G: Game + ?Sized>(
        game: &G,
        graph: &SocialGraph,
        state: ProsocialityState,
        s_start: &[f64],
    ) -> Result<Snapshot> {
        let recip = reciprocity_matrix(graph, &state)?;
        let eq = sweep_with(game, graph, &recip, s_start, SweepOptions::default())?;
        let payoffs = game.payoffs(graph, &eq.profile);
        let u = solve_with(graph, &state, &recip, &payoffs)?.u;
        Ok(Snapshot {
            state,
            recip,
            profile: eq.profile,
            payoffs,
            u,
            equilibrium_converged: eq.converged,
        })
    }

    pub fn gradients(&self, graph: &SocialGraph) -> Vec<f64> {
        (0..graph.n())
            .map(|i| self.recip.generalized_gradient(graph, &self.payoffs, &self.u, i).value)
            .collect()
    }

    pub fn record(&self, graph: &SocialGraph, t: usize) -> StepRecord {
        StepRecord {
            t,
            q: self.state.q_values(),
            s: self.profile.clone(),
            payoffs: self.payoffs.clone(),
            u: self.u.clone(),
            gradient: self.gradients(graph),
        }
    }
}

fn apply_rule(rule: UpdateRule, lambda: f64, x: f64, grad: f64) -> f64 {
    match rule {
        UpdateRule::Mixed => (1.0 - lambda) * x + lambda * grad,
        UpdateRule::Ascent => x + lambda * grad,
    }
}

/// Synchronous update of every `q_i`, clipped to `[0, q_max]`, followed by a
/// fresh equilibrium. Returns the new snapshot and the largest change in `q`.
pub fn step_generalized<G: Game + ?Sized>(
    snap: &Snapshot,
    graph: &SocialGraph,
    game: &G,
    cfg: &DynamicsConfig,
) -> Result<(Snapshot, f64)> {
    if snap.state.mode() != Mode::Generalized {
        return Err(FelixError::InvalidParameter("state is not in generalized mode".into()));
    }
    let grads = snap.gradients(graph);
    let mut moved = 0.0_f64;
    let q: Vec<f64> = (0..graph.n())
        .map(|i| {
            let old = snap.state.q(i);
            let new = if graph.degree(i) == 0 {
                0.0
            } else {
                apply_rule(cfg.rule, cfg.learning_rate, old, grads[i]).clamp(0.0, cfg.q_max)
            };
            moved = moved.max((new - old).abs());
            new
        })
        .collect();
    let state = ProsocialityState::generalized(graph, q, cfg.q_max)?;
    Ok((Snapshot::settle(game, graph, state, &snap.profile)?, moved))
}

/// Synchronous update of every `p_ij` from `∂u_i/∂p_ij = b_ii (u_j - π_i)`.
/// Weights are clipped at 0 and a row whose sum exceeds `q_max` is rescaled
/// to sum to `q_max`.
pub fn step_selective<G: Game + ?Sized>(
    snap: &Snapshot,
    graph: &SocialGraph,
    game: &G,
    cfg: &DynamicsConfig,
) -> Result<(Snapshot, f64)> {
    if snap.state.mode() != Mode::Selective {
        return Err(FelixError::InvalidParameter("state is not in selective mode".into()));
    }
    let mut moved = 0.0_f64;
    let rows: Vec<Vec<f64>> = (0..graph.n())
        .map(|i| {
            let b_ii = snap.recip.b(i, i);
            let old = snap.state.row(graph, i);
            let mut row: Vec<f64> = graph
                .neighbors(i)
                .iter()
                .zip(&old)
                .map(|(&j, &p)| {
                    let grad = b_ii * (snap.u[j] - snap.payoffs[i]);
                    apply_rule(cfg.rule, cfg.learning_rate, p, grad).max(0.0)
                })
                .collect();
            let sum: f64 = row.iter().sum();
            if sum > cfg.q_max {
                let scale = cfg.q_max / sum;
                row.iter_mut().for_each(|p| *p *= scale);
            }
            for (new, old) in row.iter().zip(&old) {
                moved = moved.max((new - old).abs());
            }
            row
        })
        .collect();
    let state = ProsocialityState::selective(graph, rows, cfg.q_max)?;
    Ok((Snapshot::settle(game, graph, state, &snap.profile)?, moved))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub final_state: ProsocialityState,
    /// Updates applied.
    pub steps: usize,
    /// The weights came to rest before `max_steps`.
    pub converged: bool,
    /// Steps whose strategy sweep did not reach a fixed point.
    pub equilibrium_failures: usize,
}

impl Trajectory {
    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trajectories hold at least one record")
    }
}

/// Iterates updates until no weight moves by `tolerance` or more for
/// `window` consecutive steps, or until `max_steps`.
///
/// `s_start` seeds the first strategy sweep; by default every node starts on
/// its first listed strategy.
pub fn run<G: Game + ?Sized>(
    graph: &SocialGraph,
    game: &G,
    init: ProsocialityState,
    s_start: Option<&[f64]>,
    cfg: &DynamicsConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    game.validate(graph)?;
    if init.mode() != cfg.mode {
        return Err(FelixError::InvalidParameter(
            "initial state mode differs from the configured mode".into(),
        ));
    }
    let default_start: Vec<f64> = (0..graph.n()).map(|i| game.strategies(graph, i)[0]).collect();
    let start = s_start.unwrap_or(&default_start);

    let mut snap = Snapshot::settle(game, graph, init, start)?;
    let mut failures = usize::from(!snap.equilibrium_converged);
    let mut records = vec![snap.record(graph, 0)];
    let mut quiet = 0;
    let mut steps = 0;
    let mut converged = false;

    while steps < cfg.max_steps {
        let (next, moved) = match cfg.mode {
            Mode::Generalized => step_generalized(&snap, graph, game, cfg)?,
            Mode::Selective => step_selective(&snap, graph, game, cfg)?,
        };
        snap = next;
        steps += 1;
        failures += usize::from(!snap.equilibrium_converged);
        quiet = if moved < cfg.tolerance { quiet + 1 } else { 0 };
        converged = quiet >= cfg.window;
        let due = cfg.record_every > 0 && steps % cfg.record_every == 0;
        if due || converged || steps == cfg.max_steps {
            records.push(snap.record(graph, steps));
        }
        if converged {
            break;
        }
    }
    Ok(Trajectory {
        records,
        final_state: snap.state,
        steps,
        converged,
        equilibrium_failures: failures,
    })
}

/// Draws the initial state from `init` and runs the dynamics.
pub fn run_from<G: Game + ?Sized>(
    graph: &SocialGraph,
    game: &G,
    init: &InitSpec,
    cfg: &DynamicsConfig,
    replicate: u64,
) -> Result<Trajectory> {
    let q = init.draw(graph, cfg.q_max, cfg.seed, replicate)?;
    let state = initial_state(graph, q, cfg.mode, cfg.q_max)?;
    run(graph, game, state, None, cfg)
}
