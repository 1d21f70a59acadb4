//! Tragedy of the Commons: `π_i = s_i V(S)`, `S = Σ_j s_j`, with a resource
//! value `V` that decreases and changes sign at `S_0`.
//!
//! In the two-group setting (`n_c` prosocial nodes sharing `q`, the rest
//! selfish) every effort is a multiple of `V/|V'|` and every payoff or
//! happiness a multiple of `V²/|V'|`, both evaluated at the equilibrium total
//! effort. [`TwoGroupOutcome`] reports quantities in those units.

use crate::error::{FelixError, Result};
use crate::games::npd::two_group_row;

/// A decreasing resource value with a root at `s0()`.
pub trait ResourceFn {
    fn value(&self, total: f64) -> f64;
    /// `V'(S)`, negative on `(0, S_0)`.
    fn slope(&self, total: f64) -> f64;
    fn s0(&self) -> f64;
}

/// Built-in resource functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vspec {
    /// `V(S) = 1 - S/S_0`.
    Linear { s0: f64 },
    /// `V(S) = 1 - (S/S_0)^k`, `k > 0`.
    Power { s0: f64, exponent: f64 },
}

impl Default for Vspec {
    fn default() -> Self {
        Vspec::Linear { s0: 1.0 }
    }
}

impl ResourceFn for Vspec {
    fn value(&self, total: f64) -> f64 {
        match *self {
            Vspec::Linear { s0 } => 1.0 - total / s0,
            Vspec::Power { s0, exponent } => 1.0 - (total / s0).powf(exponent),
        }
    }

    fn slope(&self, total: f64) -> f64 {
        match *self {
            Vspec::Linear { s0 } => -1.0 / s0,
            Vspec::Power { s0, exponent } => {
                -exponent / s0 * (total / s0).powf(exponent - 1.0)
            }
        }
    }

    fn s0(&self) -> f64 {
        match *self {
            Vspec::Linear { s0 } | Vspec::Power { s0, .. } => s0,
        }
    }
}

impl Vspec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Vspec::Linear { s0 } => s0 > 0.0 && s0.is_finite(),
            Vspec::Power { s0, exponent } => {
                s0 > 0.0 && s0.is_finite() && exponent > 0.0 && exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FelixError::InvalidParameter(format!("invalid resource function {self:?}")))
        }
    }
}

/// Which expression for the prosocial effort ratio `σ` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaForm {
    /// [`toc_sigma`].
    #[default]
    Approximate,
    /// [`toc_sigma_exact`], the best response of the happiness model.
    Exact,
}

fn check_groups(n: usize, n_c: usize, q: f64) -> Result<()> {
    if n < 2 || n_c == 0 || n_c >= n {
        return Err(FelixError::InvalidParameter(format!(
            "need 1 <= n_c <= n - 1, got n={n}, n_c={n_c}"
        )));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(FelixError::InvalidParameter(format!("q must lie in [0, 1), got {q}")));
    }
    Ok(())
}

/// Coefficients `(a, b, c)` of the numerator `a q² + b q + c` of σ.
fn sigma_numerator(n: usize, n_c: usize, form: SigmaForm) -> (f64, f64, f64) {
    let (nf, ncf) = (n as f64, n_c as f64);
    let n1 = nf - 1.0;
    match form {
        SigmaForm::Approximate => (nf * (ncf + 1.0) - 2.0 * ncf, -n1 * (2.0 * nf - 1.0), n1 * n1),
        SigmaForm::Exact => (nf * ncf - 3.0 * nf + 2.0, -n1 * (2.0 * nf - 3.0), n1 * n1),
    }
}

fn sigma_denominator(n: usize, q: f64, form: SigmaForm) -> f64 {
    let n1 = n as f64 - 1.0;
    match form {
        SigmaForm::Approximate => (1.0 - q) * n1 * (n1 - q),
        SigmaForm::Exact => (1.0 - q) * n1 * (n1 + q),
    }
}

pub fn sigma(n: usize, n_c: usize, q: f64, form: SigmaForm) -> Result<f64> {
    check_groups(n, n_c, q)?;
    let (a, b, c) = sigma_numerator(n, n_c, form);
    let num = (a * q + b) * q + c;
    Ok((num / sigma_denominator(n, q, form)).max(0.0))
}

/// Effort of a prosocial node relative to a selfish one:
///
/// ```text
/// σ = max[0, ((n-1)² - (n-1)(2n-1) q + q² (n(n_c+1) - 2 n_c)) / ((1-q)(n-1)(n-q-1))]
/// ```
///
/// This closed form sits slightly below the exact best response
/// ([`toc_sigma_exact`]); the two differ by `2q²(n_c-1)/((n-q-1)(n+q-1))`
/// before clipping.
pub fn toc_sigma(n: usize, n_c: usize, q: f64) -> Result<f64> {
    sigma(n, n_c, q, SigmaForm::Approximate)
}

/// Exact prosocial effort ratio from the first-order condition of the
/// happiness model on the complete graph:
///
/// ```text
/// σ = max[0, ((n-1)² - (n-1)(2n-3) q + q² (n n_c - 3n + 2)) / ((1-q)(n-1)(n+q-1))]
/// ```
pub fn toc_sigma_exact(n: usize, n_c: usize, q: f64) -> Result<f64> {
    sigma(n, n_c, q, SigmaForm::Exact)
}

/// Smallest root in `(0, 1]` of the numerator of σ: the prosociality from
/// which the prosocial group stops exerting effort.
pub fn qc(n: usize, n_c: usize, form: SigmaForm) -> Result<f64> {
    check_groups(n, n_c, 0.0)?;
    let (a, b, c) = sigma_numerator(n, n_c, form);
    let mut roots = Vec::with_capacity(2);
    if a.abs() < f64::EPSILON * c.abs() {
        roots.push(-c / b);
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            // b < 0, so -b + sqrt(disc) never cancels
            let big = -b + disc.sqrt();
            roots.push(2.0 * c / big);
            roots.push(big / (2.0 * a));
        }
    }
    roots
        .into_iter()
        .filter(|r| *r > 0.0 && *r <= 1.0)
        .min_by(f64::total_cmp)
        .ok_or_else(|| {
            FelixError::NoRoot(format!(
                "prosocial effort never vanishes for n={n}, n_c={n_c}"
            ))
        })
}

pub fn toc_qc(n: usize, n_c: usize) -> Result<f64> {
    qc(n, n_c, SigmaForm::Approximate)
}

pub fn toc_qc_exact(n: usize, n_c: usize) -> Result<f64> {
    qc(n, n_c, SigmaForm::Exact)
}

fn check_resource<V: ResourceFn + ?Sized>(v: &V) -> Result<()> {
    let s0 = v.s0();
    if !(s0 > 0.0 && s0.is_finite()) || !(v.value(0.0) > 0.0) {
        return Err(FelixError::InvalidParameter(
            "resource needs S_0 > 0 and V(0) > 0".into(),
        ));
    }
    for k in 1..64 {
        let s = s0 * k as f64 / 64.0;
        if !(v.slope(s) < 0.0) {
            return Err(FelixError::InvalidParameter(format!(
                "resource is not decreasing at S = {s}"
            )));
        }
    }
    Ok(())
}

/// Total effort solving `S = n_eff V(S) / |V'(S)|` on `(0, S_0)`.
///
/// `n_eff = n` gives the Nash equilibrium of `n` selfish players and
/// `n_eff = 1` the social optimum.
pub fn toc_total_effort<V: ResourceFn + ?Sized>(v: &V, n_eff: f64) -> Result<f64> {
    check_resource(v)?;
    if !(n_eff >= 1.0 && n_eff.is_finite()) {
        return Err(FelixError::InvalidParameter(format!(
            "effective player count must be >= 1, got {n_eff}"
        )));
    }
    let s0 = v.s0();
    // h(S) = S |V'(S)| - n_eff V(S) is negative at 0 and positive at S_0
    let h = |s: f64| s * v.slope(s).abs() - n_eff * v.value(s);
    let (mut lo, mut hi) = (0.0, s0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let residual = (s - n_eff * v.value(s) / v.slope(s).abs()).abs();
    if residual > 1e-10 * s0 {
        return Err(FelixError::NonConvergence {
            what: format!("total effort residual {residual:e}"),
            iterations: 2000,
        });
    }
    Ok(s)
}

/// Two-group equilibrium. Efforts are in units of `V/|V'|`, payoffs,
/// happiness and gradients in units of `V²/|V'|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGroupOutcome {
    pub sigma: f64,
    /// Absolute total effort `S*`.
    pub total_effort: f64,
    /// `V(S*)/|V'(S*)|`.
    pub effort_unit: f64,
    /// `V(S*)²/|V'(S*)|`.
    pub happiness_unit: f64,
    pub effort_c: f64,
    pub effort_d: f64,
    /// `S*/n`.
    pub mean_effort: f64,
    pub payoff_c: f64,
    pub payoff_d: f64,
    pub happiness_c: f64,
    pub happiness_d: f64,
    /// `∂u_i/∂q_i` for a prosocial node.
    pub gradient_c: f64,
    /// `∂u_i/∂q_i` for a selfish node.
    pub gradient_d: f64,
}

pub fn toc_two_group<V: ResourceFn + ?Sized>(
    n: usize,
    n_c: usize,
    q: f64,
    v: &V,
    form: SigmaForm,
) -> Result<TwoGroupOutcome> {
    let sigma = sigma(n, n_c, q, form)?;
    let (nf, ncf) = (n as f64, n_c as f64);
    let n1 = nf - 1.0;
    let n_eff = nf - ncf + ncf * sigma;
    let total_effort = toc_total_effort(v, n_eff)?;
    let value = v.value(total_effort);
    let slope = v.slope(total_effort).abs();

    let (payoff_c, payoff_d) = (sigma, 1.0);
    let happiness_d = payoff_d;
    let happiness_c = ((1.0 - q) * payoff_c + q * (nf - ncf) / n1 * happiness_d)
        / (1.0 - q * (ncf - 1.0) / n1);
    let b_cc = two_group_row(n, n_c, q).0;
    let others_of_c = ((ncf - 1.0) * happiness_c + (nf - ncf) * happiness_d) / n1;
    let others_of_d = (ncf * happiness_c + (nf - ncf - 1.0) * happiness_d) / n1;

    Ok(TwoGroupOutcome {
        sigma,
        total_effort,
        effort_unit: value / slope,
        happiness_unit: value * value / slope,
        effort_c: sigma,
        effort_d: 1.0,
        mean_effort: n_eff / nf,
        payoff_c,
        payoff_d,
        happiness_c,
        happiness_d,
        gradient_c: b_cc * (others_of_c - payoff_c),
        gradient_d: others_of_d - payoff_d,
    })
}
