//! The networked prisoner's dilemma and the wealth model on complete graphs.

use crate::error::{FelixError, Result};
use crate::graph::SocialGraph;
use crate::happiness::DEFAULT_Q_MAX;

/// Cost of cooperation and per-node wealth offset (empty means all zero).
#[derive(Debug, Clone, PartialEq)]
pub struct NpdParams {
    pub c: f64,
    pub wealth: Vec<f64>,
}

impl NpdParams {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            wealth: Vec::new(),
        }
    }

    pub fn with_wealth(c: f64, wealth: Vec<f64>) -> Self {
        Self { c, wealth }
    }

    pub fn wealth_of(&self, i: usize) -> f64 {
        self.wealth.get(i).copied().unwrap_or(0.0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(FelixError::InvalidParameter(format!(
                "cooperation cost must be positive, got {}",
                self.c
            )));
        }
        if !self.wealth.is_empty() && self.wealth.len() != n {
            return Err(FelixError::InvalidParameter(format!(
                "expected {n} wealth values, got {}",
                self.wealth.len()
            )));
        }
        if self.wealth.iter().any(|w| !w.is_finite()) {
            return Err(FelixError::InvalidParameter("wealth must be finite".into()));
        }
        Ok(())
    }
}

/// `π_i = Σ_{j∈∂i} s_j - c s_i + w_i`.
pub fn npd_payoff(graph: &SocialGraph, s: &[f64], params: &NpdParams, i: usize) -> f64 {
    let received: f64 = graph.neighbors(i).iter().map(|&j| s[j]).sum();
    received - params.c * s[i] + params.wealth_of(i)
}

/// Happiness and payoffs of the two blocks on the complete graph: `n_c`
/// cooperators with prosociality `q`, and selfish defectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletePd {
    pub u_c: f64,
    pub u_d: f64,
    pub pi_c: f64,
    pub pi_d: f64,
}

fn check_counts(n: usize, n_c: usize) -> Result<()> {
    if n < 2 || n_c > n {
        return Err(FelixError::InvalidParameter(format!(
            "need n >= 2 and n_c <= n, got n={n}, n_c={n_c}"
        )));
    }
    Ok(())
}

pub fn cg_pd_happiness(n: usize, n_c: usize, q: f64, c: f64) -> Result<CompletePd> {
    check_counts(n, n_c)?;
    if n_c == 0 {
        return Err(FelixError::InvalidParameter("need at least one cooperator".into()));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(FelixError::InvalidParameter(format!("q must lie in [0, 1), got {q}")));
    }
    let (nf, ncf) = (n as f64, n_c as f64);
    let pi_c = ncf - 1.0 - c;
    let pi_d = ncf;
    let u_c = ((1.0 - q) * pi_c + q * (nf - ncf) / (nf - 1.0) * ncf)
        / (1.0 - q * (ncf - 1.0) / (nf - 1.0));
    Ok(CompletePd {
        u_c,
        u_d: pi_d,
        pi_c,
        pi_d,
    })
}

/// `q_c = c / (c + (n - n_c)/(n - 1))`: a cooperator with `q < q_c` is better
/// off defecting.
pub fn cg_pd_threshold(n: usize, n_c: usize, c: f64) -> Result<f64> {
    check_counts(n, n_c)?;
    let frac = (n - n_c) as f64 / (n - 1) as f64;
    Ok(c / (c + frac))
}

/// `π_d(n_c) - u_c(n_c + 1)`: payoff of a defector against the happiness it
/// would reach by joining the cooperators with prosociality `q`.
///
/// Equals `[(1-q)c - q(n-n_c-1)/(n-1)] / [1 - q n_c/(n-1)]`, so it is positive
/// exactly when `q < cg_pd_threshold(n, n_c + 1, c)`.
pub fn cg_pd_defection_gap(n: usize, n_c: usize, q: f64, c: f64) -> Result<f64> {
    if n_c >= n {
        return Err(FelixError::InvalidParameter(format!(
            "need n_c < n, got n={n}, n_c={n_c}"
        )));
    }
    let pi_d = n_c as f64;
    Ok(pi_d - cg_pd_happiness(n, n_c + 1, q, c)?.u_c)
}

/// `b_ii` for a member of a block of `m` nodes sharing prosociality `q` on
/// the complete graph, everybody else selfish.
pub fn two_group_self_reciprocity(n: usize, m: usize, q: f64) -> f64 {
    two_group_row(n, m, q).0
}

/// Row of `B` for a member `i` of a block of `m` nodes with prosociality
/// `q` on the complete graph of `n` nodes: `(b_ii, b_ij for j in the block,
/// b_ij for j outside)`.
pub fn two_group_row(n: usize, m: usize, q: f64) -> (f64, f64, f64) {
    let (n1, mf) = ((n - 1) as f64, m as f64);
    let z = n1 / (n1 + q - mf * q);
    let own = (n1 + q * z) / (n1 + q);
    let inside = q * z / (n1 + q);
    let outside = q * z / n1;
    (own, inside, outside)
}

fn check_q_vec(q: &[f64], w: &[f64]) -> Result<()> {
    if q.len() != w.len() || q.len() < 2 {
        return Err(FelixError::InvalidParameter(
            "q and w need equal length >= 2".into(),
        ));
    }
    if let Some(x) = q.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(FelixError::InvalidParameter(format!("q = {x} outside [0, 1)")));
    }
    Ok(())
}

/// Happiness on the complete graph when payoffs are fixed wealth levels:
///
/// ```text
/// u_i = f_i w_i + g_i / (1 - G) Σ_j f_j w_j
/// f_i = (n-1)(1-q_i) / (n-1+q_i),  g_i = q_i / (n-1+q_i),  G = Σ_j g_j
/// ```
pub fn wealth_happiness(q: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_q_vec(q, w)?;
    let n1 = (q.len() - 1) as f64;
    let f: Vec<f64> = q.iter().map(|&qi| n1 * (1.0 - qi) / (n1 + qi)).collect();
    let g: Vec<f64> = q.iter().map(|&qi| qi / (n1 + qi)).collect();
    let big_g: f64 = g.iter().sum();
    assert!(big_g < 1.0, "G = {big_g} >= 1 with every q below 1");
    let pool: f64 = f.iter().zip(w).map(|(fi, wi)| fi * wi).sum::<f64>() / (1.0 - big_g);
    Ok((0..q.len()).map(|i| f[i] * w[i] + g[i] * pool).collect())
}

fn split_population(n: usize, w: &[f64], selfish: &[usize]) -> Result<(Vec<bool>, f64)> {
    if w.len() != n || n < 2 {
        return Err(FelixError::InvalidParameter(format!(
            "expected {n} >= 2 wealth values, got {}",
            w.len()
        )));
    }
    let mut is_selfish = vec![false; n];
    for &i in selfish {
        if i >= n {
            return Err(FelixError::InvalidParameter(format!("node {i} out of range")));
        }
        is_selfish[i] = true;
    }
    let count = is_selfish.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(FelixError::Degenerate(
            "empty selfish set: mean selfish wealth is undefined".into(),
        ));
    }
    let mean = (0..n).filter(|&i| is_selfish[i]).map(|i| w[i]).sum::<f64>() / count as f64;
    Ok((is_selfish, mean))
}

/// Gradients `∂u_i/∂q_i` on the complete graph when the population is split
/// into selfish nodes (`q = 0`) and fully prosocial nodes (`q = 1`, with
/// `b_ii` evaluated at the default cap). With `with_pd`, selfish nodes
/// defect and prosocial nodes cooperate in the prisoner's dilemma on top of
/// their wealth.
///
/// ```text
/// no PD:  q=0: (1 - 1/n) b_ii (<w>_f - w_i)    q=1: b_ii ((n+1)/(n-1) <w>_f - w_i)
/// PD:     q=0: n/(n-1) b_ii (<w>_f - w_i)      q=1: b_ii (1 + c + <w>_f - w_i)
/// ```
///
/// `<w>_f` is the mean wealth of the selfish nodes. The wealth-only pair is
/// not the exact derivative of the happiness fixed point; see
/// [`wealth_gradient_extremes_exact`].
pub fn wealth_gradient_extremes(
    n: usize,
    w: &[f64],
    selfish: &[usize],
    c: f64,
    with_pd: bool,
) -> Result<Vec<f64>> {
    let (is_selfish, mean_f) = split_population(n, w, selfish)?;
    let nf = n as f64;
    let n_prosocial = is_selfish.iter().filter(|&&b| !b).count();
    let b_pro = two_group_self_reciprocity(n, n_prosocial, DEFAULT_Q_MAX);
    Ok((0..n)
        .map(|i| match (is_selfish[i], with_pd) {
            (true, false) => (1.0 - 1.0 / nf) * (mean_f - w[i]),
            (true, true) => nf / (nf - 1.0) * (mean_f - w[i]),
            (false, false) => b_pro * ((nf + 1.0) / (nf - 1.0) * mean_f - w[i]),
            (false, true) => b_pro * (1.0 + c + mean_f - w[i]),
        })
        .collect())
}

/// Exact limits of `∂u_i/∂q_i` for the same split as
/// [`wealth_gradient_extremes`]:
///
/// ```text
/// no PD:  q=0: n/(n-1) (<w>_f - w_i)           q=1: b_ii (<w>_f - w_i)
/// PD:     q=0: n/(n-1) (<w>_f - w_i)           q=1: b_ii (1 + c + <w>_f - w_i)
/// ```
pub fn wealth_gradient_extremes_exact(
    n: usize,
    w: &[f64],
    selfish: &[usize],
    c: f64,
    with_pd: bool,
) -> Result<Vec<f64>> {
    let (is_selfish, mean_f) = split_population(n, w, selfish)?;
    let nf = n as f64;
    let n_prosocial = is_selfish.iter().filter(|&&b| !b).count();
    let b_pro = two_group_self_reciprocity(n, n_prosocial, DEFAULT_Q_MAX);
    let bonus = if with_pd { 1.0 + c } else { 0.0 };
    Ok((0..n)
        .map(|i| {
            if is_selfish[i] {
                nf / (nf - 1.0) * (mean_f - w[i])
            } else {
                b_pro * (bonus + mean_f - w[i])
            }
        })
        .collect())
}
