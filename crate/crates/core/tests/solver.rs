use felix_core::happiness::{fixed_point_residual, generalized_gradient, reciprocity_matrix, selective_gradient};
use felix_core::rng::{stream, uniform, Purpose};
use felix_core::{solve_happiness, ProsocialityState, SocialGraph, DEFAULT_Q_MAX};
use proptest::prelude::*;
use rand::Rng;

/// Random connected-or-not graph on `n` nodes with edge probability `p`.
fn random_graph(n: usize, p: f64, seed: u64) -> SocialGraph {
    let mut rng = stream(seed, Purpose::Misc, 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    SocialGraph::from_edges(n, edges).unwrap()
}

fn random_q(g: &SocialGraph, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Prosociality, 0);
    (0..g.n())
        .map(|i| if g.degree(i) == 0 { 0.0 } else { uniform(&mut rng, 0.0, 0.95) })
        .collect()
}

fn random_rows(g: &SocialGraph, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, Purpose::Prosociality, 1);
    (0..g.n())
        .map(|i| {
            let raw: Vec<f64> = (0..g.degree(i)).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let q = uniform(&mut rng, 0.0, 0.95);
            raw.iter().map(|x| if total > 0.0 { q * x / total } else { 0.0 }).collect()
        })
        .collect()
}

fn random_payoffs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Misc, 1);
    (0..n).map(|_| uniform(&mut rng, -3.0, 3.0)).collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// `u = Σ_k P^k diag(1-q) π`, summed until the terms vanish.
fn neumann(g: &SocialGraph, state: &ProsocialityState, payoffs: &[f64]) -> Vec<f64> {
    let n = g.n();
    let mut term: Vec<f64> = (0..n).map(|i| (1.0 - state.q(i)) * payoffs[i]).collect();
    let mut sum = term.clone();
    for _ in 0..20_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                g.neighbors(i)
                    .iter()
                    .zip(state.row(g, i))
                    .map(|(&j, p)| p * term[j])
                    .sum()
            })
            .collect();
        let size = next.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for (s, t) in sum.iter_mut().zip(&next) {
            *s += t;
        }
        term = next;
        if size < 1e-15 {
            break;
        }
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generalized_solution_is_a_fixed_point(n in 2usize..=10, p in 0.2f64..1.0, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let state = ProsocialityState::generalized(&g, random_q(&g, seed), DEFAULT_Q_MAX).unwrap();
        let pi = random_payoffs(n, seed);
        let sol = solve_happiness(&g, &state, &pi).unwrap();
        prop_assert!(sol.residual <= 1e-10);
        prop_assert!(fixed_point_residual(&g, &state, &pi, &sol.u) <= 1e-10);
        let series = neumann(&g, &state, &pi);
        for i in 0..n {
            prop_assert!(rel_close(sol.u[i], series[i], 1e-9), "node {i}: {} vs {}", sol.u[i], series[i]);
        }
    }

    #[test]
    fn generalized_gradient_matches_finite_differences(n in 2usize..=10, p in 0.2f64..1.0, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let q = random_q(&g, seed);
        let pi = random_payoffs(n, seed);
        let state = ProsocialityState::generalized(&g, q.clone(), DEFAULT_Q_MAX).unwrap();
        let u = solve_happiness(&g, &state, &pi).unwrap().u;
        let h = 1e-6;
        for i in 0..n {
            let grad = generalized_gradient(&g, &state, &pi, &u, i).unwrap();
            if g.degree(i) == 0 {
                prop_assert!(grad.isolated && grad.value == 0.0);
                continue;
            }
            let at = |x: f64| {
                let mut qq = q.clone();
                qq[i] = x;
                let s = ProsocialityState::generalized(&g, qq, DEFAULT_Q_MAX).unwrap();
                solve_happiness(&g, &s, &pi).unwrap().u[i]
            };
            let fd = (at(q[i] + h) - at(q[i] - h)) / (2.0 * h);
            prop_assert!(rel_close(grad.value, fd, 1e-5), "node {i}: {} vs {fd}", grad.value);
        }
    }

    #[test]
    fn selective_gradient_matches_finite_differences(n in 2usize..=8, p in 0.3f64..1.0, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let rows = random_rows(&g, seed);
        let pi = random_payoffs(n, seed);
        let state = ProsocialityState::selective(&g, rows.clone(), DEFAULT_Q_MAX).unwrap();
        let sol = solve_happiness(&g, &state, &pi).unwrap();
        prop_assert!(sol.residual <= 1e-10);
        let h = 1e-6;
        for (i, j) in g.edges().flat_map(|(a, b)| [(a, b), (b, a)]) {
            let slot = g.neighbor_index(i, j).unwrap();
            let at = |x: f64| {
                let mut r = rows.clone();
                r[i][slot] = x;
                let s = ProsocialityState::selective(&g, r, DEFAULT_Q_MAX).unwrap();
                solve_happiness(&g, &s, &pi).unwrap().u
            };
            let (up, down) = (at(rows[i][slot] + h), at(rows[i][slot] - h));
            for k in 0..n {
                let fd = (up[k] - down[k]) / (2.0 * h);
                let grad = selective_gradient(&g, &state, &pi, &sol.u, k, i, j).unwrap();
                prop_assert!(rel_close(grad, fd, 1e-5), "k={k} edge ({i},{j}): {grad} vs {fd}");
            }
        }
    }

    #[test]
    fn reciprocity_rows_are_stochastic_after_weighting(n in 2usize..=10, p in 0.2f64..1.0, seed in any::<u64>()) {
        // a constant payoff is everybody's happiness
        let g = random_graph(n, p, seed);
        let state = ProsocialityState::generalized(&g, random_q(&g, seed), DEFAULT_Q_MAX).unwrap();
        let b = reciprocity_matrix(&g, &state).unwrap();
        for k in 0..n {
            let total: f64 = (0..n).map(|j| b.b(k, j) * b.own_weight(j)).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            prop_assert!(b.b(k, k) >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn selfish_happiness_is_payoff() {
    let g = random_graph(7, 0.5, 3);
    let state = ProsocialityState::selfish(&g, felix_core::Mode::Generalized, DEFAULT_Q_MAX).unwrap();
    let pi = random_payoffs(7, 3);
    assert_eq!(solve_happiness(&g, &state, &pi).unwrap().u, pi);
}

#[test]
fn large_graph_uses_iterative_path_and_agrees_with_series() {
    let g = random_graph(600, 0.01, 11);
    let state = ProsocialityState::generalized(&g, random_q(&g, 11), DEFAULT_Q_MAX).unwrap();
    let pi = random_payoffs(600, 11);
    let sol = solve_happiness(&g, &state, &pi).unwrap();
    assert!(sol.residual <= 1e-10 * 3.0);
    let series = neumann(&g, &state, &pi);
    for i in 0..600 {
        assert!(rel_close(sol.u[i], series[i], 1e-8));
    }
}
