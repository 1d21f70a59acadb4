//! Happiness fixed point, reciprocity matrix and exact gradients.
//!
//! Happiness solves the linear system
//!
//! ```text
//! u_i = (1 - q_i) π_i + Σ_{j ∈ ∂i} p_ij u_j,      q_i = Σ_j p_ij
//! ```
//!
//! i.e. `(I - P) u = diag(1 - q) π`. With every row sum `q_i` strictly below
//! one, `I - P` is strictly diagonally dominant, so the system always has a
//! unique solution and `B = (I - P)^-1 = I + P + P² + ...` is entrywise
//! non-negative with `b_ii >= 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{FelixError, Result};
use crate::graph::SocialGraph;

/// Default cap on total prosociality, `1 - 1e-6`.
pub const DEFAULT_Q_MAX: f64 = 1.0 - 1e-6;

/// Systems up to this size are solved with a dense LU factorization; larger
/// ones use Gauss-Seidel sweeps over the neighbor lists.
pub const DENSE_LIMIT: usize = 512;

/// Bound on `max_i |(I-P)u - diag(1-q)π|_i`, relative to `max(1, |π|_∞)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

const ROW_SUM_SLACK: f64 = 1e-12;
const GS_MAX_SWEEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One weight per directed edge.
    Selective,
    /// `p_ij = q_i / k_i` for every neighbor `j`.
    Generalized,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Generalized(Vec<f64>),
    /// `rows[i][k]` is the weight on `graph.neighbors(i)[k]`.
    Selective(Vec<Vec<f64>>),
}

/// Prosociality weights `p_ij` of a population on a fixed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsocialityState {
    weights: Weights,
    q_max: f64,
}

fn check_q_max(q_max: f64) -> Result<()> {
    if q_max > 0.0 && q_max < 1.0 {
        Ok(())
    } else {
        Err(FelixError::InvalidProsociality(format!(
            "q_max must lie in (0, 1), got {q_max}"
        )))
    }
}

impl ProsocialityState {
    /// Generalized altruism with per-node totals `q`. Isolated nodes must
    /// have `q_i = 0` since they have nobody to care about.
    pub fn generalized(graph: &SocialGraph, q: Vec<f64>, q_max: f64) -> Result<Self> {
        check_q_max(q_max)?;
        if q.len() != graph.n() {
            return Err(FelixError::InvalidProsociality(format!(
                "expected {} values of q, got {}",
                graph.n(),
                q.len()
            )));
        }
        for (i, &qi) in q.iter().enumerate() {
            if !qi.is_finite() || qi < 0.0 || qi > q_max + ROW_SUM_SLACK {
                return Err(FelixError::InvalidProsociality(format!(
                    "q[{i}] = {qi} outside [0, {q_max}]"
                )));
            }
            if graph.degree(i) == 0 && qi != 0.0 {
                return Err(FelixError::InvalidProsociality(format!(
                    "isolated node {i} has q = {qi}"
                )));
            }
        }
        Ok(Self {
            weights: Weights::Generalized(q),
            q_max,
        })
    }

    /// Selective altruism; `rows[i]` is aligned with `graph.neighbors(i)`.
    pub fn selective(graph: &SocialGraph, rows: Vec<Vec<f64>>, q_max: f64) -> Result<Self> {
        check_q_max(q_max)?;
        if rows.len() != graph.n() {
            return Err(FelixError::InvalidProsociality(format!(
                "expected {} rows, got {}",
                graph.n(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != graph.degree(i) {
                return Err(FelixError::InvalidProsociality(format!(
                    "row {i} has {} weights for {} neighbors",
                    row.len(),
                    graph.degree(i)
                )));
            }
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(FelixError::InvalidProsociality(format!(
                    "row {i} has invalid weight {p}"
                )));
            }
            let total: f64 = row.iter().sum();
            if total > q_max + ROW_SUM_SLACK {
                return Err(FelixError::InvalidProsociality(format!(
                    "row {i} sums to {total} > q_max = {q_max}"
                )));
            }
        }
        Ok(Self {
            weights: Weights::Selective(rows),
            q_max,
        })
    }

    /// Selective weights from `(i, j, p_ij)` triples; unspecified edges get 0.
    pub fn selective_from_triples<I>(graph: &SocialGraph, triples: I, q_max: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<f64>> = (0..graph.n()).map(|i| vec![0.0; graph.degree(i)]).collect();
        for (i, j, p) in triples {
            let k = graph
                .neighbor_index(i, j)
                .ok_or(FelixError::NotAnEdge { i, j })?;
            rows[i][k] = p;
        }
        Self::selective(graph, rows, q_max)
    }

    /// Everybody selfish.
    pub fn selfish(graph: &SocialGraph, mode: Mode, q_max: f64) -> Result<Self> {
        match mode {
            Mode::Generalized => Self::generalized(graph, vec![0.0; graph.n()], q_max),
            Mode::Selective => Self::selective(
                graph,
                (0..graph.n()).map(|i| vec![0.0; graph.degree(i)]).collect(),
                q_max,
            ),
        }
    }

    pub fn mode(&self) -> Mode {
        match self.weights {
            Weights::Generalized(_) => Mode::Generalized,
            Weights::Selective(_) => Mode::Selective,
        }
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n(&self) -> usize {
        match &self.weights {
            Weights::Generalized(q) => q.len(),
            Weights::Selective(rows) => rows.len(),
        }
    }

    /// Total prosociality `q_i = Σ_j p_ij`.
    pub fn q(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Generalized(q) => q[i],
            Weights::Selective(rows) => rows[i].iter().sum(),
        }
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.q(i)).collect()
    }

    /// Weight `p_ij`; zero when `j` is not a neighbor of `i`.
    pub fn weight(&self, graph: &SocialGraph, i: usize, j: usize) -> f64 {
        match graph.neighbor_index(i, j) {
            None => 0.0,
            Some(k) => match &self.weights {
                Weights::Generalized(q) => q[i] / graph.degree(i) as f64,
                Weights::Selective(rows) => rows[i][k],
            },
        }
    }

    /// Weights of row `i`, aligned with `graph.neighbors(i)`.
    pub fn row(&self, graph: &SocialGraph, i: usize) -> Vec<f64> {
        match &self.weights {
            Weights::Generalized(q) => {
                let k = graph.degree(i);
                vec![if k == 0 { 0.0 } else { q[i] / k as f64 }; k]
            }
            Weights::Selective(rows) => rows[i].clone(),
        }
    }

    /// Selective rows (or the implied uniform rows in generalized mode).
    pub fn rows(&self, graph: &SocialGraph) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(graph, i)).collect()
    }

    /// Dense `P`.
    pub fn dense(&self, graph: &SocialGraph) -> DMatrix<f64> {
        let n = graph.n();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            for (&j, w) in graph.neighbors(i).iter().zip(self.row(graph, i)) {
                p[(i, j)] = w;
            }
        }
        p
    }

    fn ensure_graph(&self, graph: &SocialGraph) -> Result<()> {
        if self.n() != graph.n() {
            return Err(FelixError::InvalidProsociality(format!(
                "state has {} nodes, graph has {}",
                self.n(),
                graph.n()
            )));
        }
        if let Weights::Selective(rows) = &self.weights {
            if rows.iter().enumerate().any(|(i, r)| r.len() != graph.degree(i)) {
                return Err(FelixError::InvalidProsociality(
                    "selective rows do not match the graph".into(),
                ));
            }
        }
        Ok(())
    }

    fn check_solvable(&self) -> Result<()> {
        for i in 0..self.n() {
            let q = self.q(i);
            if q >= 1.0 {
                return Err(FelixError::InvalidProsociality(format!(
                    "q[{i}] = {q} >= 1, I - P may be singular"
                )));
            }
        }
        Ok(())
    }
}

/// Gradient of a node's happiness with respect to its own total prosociality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGradient {
    pub value: f64,
    /// Node has no neighbors; `value` is defined as 0.
    pub isolated: bool,
}

/// Solved happiness for one strategy profile.
#[derive(Debug, Clone, PartialEq)]
pub struct HappinessSolution {
    pub u: Vec<f64>,
    pub b_diag: Vec<f64>,
    /// `max_i |((I-P)u - diag(1-q)π)_i|`.
    pub residual: f64,
}

/// `B = (I - P)^-1` together with the own-payoff weights `1 - q_i`.
#[derive(Debug, Clone)]
pub struct Reciprocity {
    b: DMatrix<f64>,
    own_weight: Vec<f64>,
}

impl Reciprocity {
    pub fn n(&self) -> usize {
        self.own_weight.len()
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.b.diagonal().iter().copied().collect()
    }

    /// `1 - q_i`.
    pub fn own_weight(&self, i: usize) -> f64 {
        self.own_weight[i]
    }

    /// `u = B diag(1 - q) π`.
    pub fn happiness(&self, payoffs: &[f64]) -> Vec<f64> {
        let weighted = self.weighted(payoffs);
        (&self.b * weighted).iter().copied().collect()
    }

    /// `u_i = Σ_j b_ij (1 - q_j) π_j`.
    pub fn happiness_of(&self, i: usize, payoffs: &[f64]) -> f64 {
        payoffs
            .iter()
            .enumerate()
            .map(|(j, p)| self.b[(i, j)] * self.own_weight[j] * p)
            .sum()
    }

    fn weighted(&self, payoffs: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            payoffs.len(),
            payoffs.iter().zip(&self.own_weight).map(|(p, w)| p * w),
        )
    }

    /// `∂u_k/∂p_ij = b_ki (u_j - π_i)`.
    pub fn selective_gradient(
        &self,
        graph: &SocialGraph,
        payoffs: &[f64],
        u: &[f64],
        k: usize,
        i: usize,
        j: usize,
    ) -> Result<f64> {
        if !graph.has_edge(i, j) {
            return Err(FelixError::NotAnEdge { i, j });
        }
        Ok(self.b[(k, i)] * (u[j] - payoffs[i]))
    }

    /// `∂u_i/∂q_i = b_ii (mean_{j ∈ ∂i} u_j - π_i)` under `dp_ij = dq_i / k_i`.
    pub fn generalized_gradient(
        &self,
        graph: &SocialGraph,
        payoffs: &[f64],
        u: &[f64],
        i: usize,
    ) -> NodeGradient {
        let nb = graph.neighbors(i);
        if nb.is_empty() {
            return NodeGradient {
                value: 0.0,
                isolated: true,
            };
        }
        let mean = nb.iter().map(|&j| u[j]).sum::<f64>() / nb.len() as f64;
        NodeGradient {
            value: self.b[(i, i)] * (mean - payoffs[i]),
            isolated: false,
        }
    }
}

fn check_payoffs(graph: &SocialGraph, payoffs: &[f64]) -> Result<()> {
    if payoffs.len() != graph.n() {
        return Err(FelixError::InvalidParameter(format!(
            "expected {} payoffs, got {}",
            graph.n(),
            payoffs.len()
        )));
    }
    if let Some(i) = payoffs.iter().position(|p| !p.is_finite()) {
        return Err(FelixError::InvalidParameter(format!(
            "payoff of node {i} is not finite"
        )));
    }
    Ok(())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `max_i |u_i - (1-q_i)π_i - Σ_j p_ij u_j|`.
pub fn fixed_point_residual(
    graph: &SocialGraph,
    state: &ProsocialityState,
    payoffs: &[f64],
    u: &[f64],
) -> f64 {
    (0..graph.n())
        .map(|i| {
            let spill: f64 = graph
                .neighbors(i)
                .iter()
                .zip(state.row(graph, i))
                .map(|(&j, p)| p * u[j])
                .sum();
            (u[i] - (1.0 - state.q(i)) * payoffs[i] - spill).abs()
        })
        .fold(0.0, f64::max)
}

/// `B = (I - P)^-1`.
pub fn reciprocity_matrix(graph: &SocialGraph, state: &ProsocialityState) -> Result<Reciprocity> {
    state.ensure_graph(graph)?;
    state.check_solvable()?;
    let n = graph.n();
    let own_weight: Vec<f64> = (0..n).map(|i| 1.0 - state.q(i)).collect();
    let b = if n <= DENSE_LIMIT {
        dense_inverse(graph, state)?
    } else {
        let mut b = DMatrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for col in 0..n {
            rhs[col] = 1.0;
            let x = gauss_seidel(graph, state, &rhs)?;
            rhs[col] = 0.0;
            b.set_column(col, &DVector::from_vec(x));
        }
        b
    };
    Ok(Reciprocity { b, own_weight })
}

fn dense_inverse(graph: &SocialGraph, state: &ProsocialityState) -> Result<DMatrix<f64>> {
    let n = graph.n();
    let a = DMatrix::identity(n, n) - state.dense(graph);
    let mut b = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(FelixError::Singular { residual: f64::INFINITY })?;
    // one step of iterative refinement: B <- B + B (I - A B)
    let defect = DMatrix::identity(n, n) - &a * &b;
    b += &b * defect;
    let err = (&a * &b - DMatrix::identity(n, n)).amax();
    let scale = b.amax().max(1.0);
    if !err.is_finite() || err > RESIDUAL_TOL * scale {
        return Err(FelixError::Singular { residual: err });
    }
    Ok(b)
}

/// Solves `(I - P) x = rhs` by Gauss-Seidel. Converges for every admissible
/// state since each row is strictly diagonally dominant.
fn gauss_seidel(graph: &SocialGraph, state: &ProsocialityState, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = graph.n();
    let rows = state.rows(graph);
    let mut x = rhs.to_vec();
    let scale = sup_norm(rhs).max(1.0);
    for sweep in 0..GS_MAX_SWEEPS {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let spill: f64 = graph
                .neighbors(i)
                .iter()
                .zip(&rows[i])
                .map(|(&j, p)| p * x[j])
                .sum();
            let next = rhs[i] + spill;
            delta = delta.max((next - x[i]).abs());
            x[i] = next;
        }
        if delta <= 1e-3 * RESIDUAL_TOL * scale {
            let res = (0..n)
                .map(|i| {
                    let spill: f64 = graph
                        .neighbors(i)
                        .iter()
                        .zip(&rows[i])
                        .map(|(&j, p)| p * x[j])
                        .sum();
                    (x[i] - spill - rhs[i]).abs()
                })
                .fold(0.0, f64::max);
            if res <= RESIDUAL_TOL * scale {
                return Ok(x);
            }
        }
        if !delta.is_finite() {
            return Err(FelixError::Singular { residual: delta });
        }
        let _ = sweep;
    }
    Err(FelixError::NonConvergence {
        what: "Gauss-Seidel happiness solve".into(),
        iterations: GS_MAX_SWEEPS,
    })
}

/// Solves the happiness fixed point for payoffs `π`.
pub fn solve_happiness(
    graph: &SocialGraph,
    state: &ProsocialityState,
    payoffs: &[f64],
) -> Result<HappinessSolution> {
    check_payoffs(graph, payoffs)?;
    let recip = reciprocity_matrix(graph, state)?;
    solve_with(graph, state, &recip, payoffs)
}

/// Same as [`solve_happiness`] reusing a precomputed `B`.
pub fn solve_with(
    graph: &SocialGraph,
    state: &ProsocialityState,
    recip: &Reciprocity,
    payoffs: &[f64],
) -> Result<HappinessSolution> {
    check_payoffs(graph, payoffs)?;
    let mut u = recip.happiness(payoffs);
    let mut residual = fixed_point_residual(graph, state, payoffs, &u);
    let bound = RESIDUAL_TOL * sup_norm(payoffs).max(1.0);
    if residual > 1e-3 * bound {
        // refine: u <- u + B r
        let r: Vec<f64> = (0..graph.n())
            .map(|i| {
                let spill: f64 = graph
                    .neighbors(i)
                    .iter()
                    .zip(state.row(graph, i))
                    .map(|(&j, p)| p * u[j])
                    .sum();
                (1.0 - state.q(i)) * payoffs[i] + spill - u[i]
            })
            .collect();
        let correction = &recip.b * DVector::from_vec(r);
        for (ui, c) in u.iter_mut().zip(correction.iter()) {
            *ui += c;
        }
        residual = fixed_point_residual(graph, state, payoffs, &u);
    }
    if !residual.is_finite() || residual > bound {
        return Err(FelixError::Singular { residual });
    }
    Ok(HappinessSolution {
        u,
        b_diag: recip.diagonal(),
        residual,
    })
}

/// `∂u_k/∂p_ij` at fixed strategies.
pub fn selective_gradient(
    graph: &SocialGraph,
    state: &ProsocialityState,
    payoffs: &[f64],
    u: &[f64],
    k: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    if !graph.has_edge(i, j) {
        return Err(FelixError::NotAnEdge { i, j });
    }
    reciprocity_matrix(graph, state)?.selective_gradient(graph, payoffs, u, k, i, j)
}

/// `∂u_i/∂q_i` at fixed strategies, for `dp_ij = dq_i / k_i`.
pub fn generalized_gradient(
    graph: &SocialGraph,
    state: &ProsocialityState,
    payoffs: &[f64],
    u: &[f64],
    i: usize,
) -> Result<NodeGradient> {
    Ok(reciprocity_matrix(graph, state)?.generalized_gradient(graph, payoffs, u, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair() -> SocialGraph {
        SocialGraph::from_edges(2, [(0, 1)]).unwrap()
    }

    fn two_node(p12: f64, p21: f64) -> (SocialGraph, ProsocialityState) {
        let g = pair();
        let s = ProsocialityState::selective(&g, vec![vec![p12], vec![p21]], DEFAULT_Q_MAX).unwrap();
        (g, s)
    }

    #[test]
    fn identity_when_selfish() {
        let g = SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let s = ProsocialityState::selfish(&g, Mode::Selective, DEFAULT_Q_MAX).unwrap();
        let b = reciprocity_matrix(&g, &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.b(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn symmetric_half_weights() {
        let (g, s) = two_node(0.5, 0.5);
        let b = reciprocity_matrix(&g, &s).unwrap();
        assert_abs_diff_eq!(b.b(0, 0), 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.b(1, 1), 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.b(0, 1), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.b(1, 0), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn one_way_weight_is_nilpotent() {
        let (g, s) = two_node(0.5, 0.0);
        let b = reciprocity_matrix(&g, &s).unwrap();
        assert_abs_diff_eq!(b.b(0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.b(0, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.b(1, 0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.b(1, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_total_at_or_above_one() {
        let g = pair();
        assert!(ProsocialityState::generalized(&g, vec![1.0, 0.0], DEFAULT_Q_MAX).is_err());
        assert!(ProsocialityState::generalized(&g, vec![0.5, 0.0], 1.0).is_err());
        assert!(ProsocialityState::selective(&g, vec![vec![-0.1], vec![0.0]], 0.9).is_err());
    }

    #[test]
    fn isolated_node_must_be_selfish() {
        let g = SocialGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(ProsocialityState::generalized(&g, vec![0.1, 0.1, 0.2], 0.9).is_err());
        assert!(ProsocialityState::generalized(&g, vec![0.1, 0.1, 0.0], 0.9).is_ok());
    }

    #[test]
    fn selfish_limit_is_payoff() {
        let (g, s) = two_node(0.0, 0.0);
        let sol = solve_happiness(&g, &s, &[3.0, 5.0]).unwrap();
        assert_eq!(sol.u, vec![3.0, 5.0]);
        assert_eq!(sol.b_diag, vec![1.0, 1.0]);
    }

    #[test]
    fn hand_solved_two_node_systems() {
        let (g, s) = two_node(0.5, 0.0);
        let sol = solve_happiness(&g, &s, &[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(sol.u[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.u[1], 2.0, epsilon = 1e-14);

        let (g, s) = two_node(0.5, 0.5);
        let sol = solve_happiness(&g, &s, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(sol.u[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.u[1], 1.0 / 3.0, epsilon = 1e-14);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn selective_gradient_hand_value() {
        let (g, s) = two_node(0.5, 0.5);
        let pi = [1.0, 0.0];
        let sol = solve_happiness(&g, &s, &pi).unwrap();
        let d = selective_gradient(&g, &s, &pi, &sol.u, 0, 0, 1).unwrap();
        assert_abs_diff_eq!(d, -8.0 / 9.0, epsilon = 1e-13);
    }

    #[test]
    fn selective_gradient_selfish_is_plain_difference() {
        let (g, s) = two_node(0.0, 0.0);
        let pi = [2.0, 7.0];
        let d = selective_gradient(&g, &s, &pi, &pi, 0, 0, 1).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn selective_gradient_rejects_non_edges() {
        let g = SocialGraph::from_edges(3, [(0, 1)]).unwrap();
        let s = ProsocialityState::selfish(&g, Mode::Selective, DEFAULT_Q_MAX).unwrap();
        let err = selective_gradient(&g, &s, &[0.0; 3], &[0.0; 3], 0, 0, 2).unwrap_err();
        assert_eq!(err, FelixError::NotAnEdge { i: 0, j: 2 });
    }

    #[test]
    fn generalized_gradient_on_star_center() {
        let g = SocialGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = ProsocialityState::selfish(&g, Mode::Generalized, DEFAULT_Q_MAX).unwrap();
        let pi = [0.25, 2.0, 2.0, 2.0];
        let d = generalized_gradient(&g, &s, &pi, &pi, 0).unwrap();
        assert!(!d.isolated);
        assert_eq!(d.value, 2.0 - 0.25);
    }

    #[test]
    fn isolated_gradient_is_flagged_zero() {
        let g = SocialGraph::from_edges(3, [(0, 1)]).unwrap();
        let s = ProsocialityState::selfish(&g, Mode::Generalized, DEFAULT_Q_MAX).unwrap();
        let d = generalized_gradient(&g, &s, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(
            d,
            NodeGradient {
                value: 0.0,
                isolated: true
            }
        );
    }

    #[test]
    fn upper_triangular_weights_have_unit_diagonal() {
        let g = SocialGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let s = ProsocialityState::selective_from_triples(
            &g,
            [(0, 1, 0.3), (0, 3, 0.4), (1, 2, 0.9), (2, 3, 0.5)],
            DEFAULT_Q_MAX,
        )
        .unwrap();
        let b = reciprocity_matrix(&g, &s).unwrap();
        for d in b.diagonal() {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gauss_seidel_matches_dense() {
        let g = SocialGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let s = ProsocialityState::generalized(&g, vec![0.9, 0.2, 0.7, 0.99, 0.5], DEFAULT_Q_MAX)
            .unwrap();
        let rhs = [1.0, -2.0, 0.5, 3.0, 0.0];
        let x = gauss_seidel(&g, &s, &rhs).unwrap();
        let b = dense_inverse(&g, &s).unwrap();
        let y = &b * DVector::from_row_slice(&rhs);
        for (a, b) in x.iter().zip(y.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn large_graph_takes_iterative_route() {
        let n = DENSE_LIMIT + 8;
        let g = SocialGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap();
        let q: Vec<f64> = (0..n).map(|i| 0.3 + 0.4 * ((i % 7) as f64 / 7.0)).collect();
        let s = ProsocialityState::generalized(&g, q, DEFAULT_Q_MAX).unwrap();
        let pi: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let sol = solve_happiness(&g, &s, &pi).unwrap();
        assert!(sol.residual <= RESIDUAL_TOL * 5.0);
        assert!(sol.b_diag.iter().all(|&b| b >= 1.0));
    }
}
