//! Runs a resolved experiment and renders its output files in memory.

use std::path::Path;

use felix_core::dynamics::{initial_state, run, Trajectory};
use felix_core::equilibrium::graphical_nc;
use felix_core::games::commons::{toc_qc, toc_qc_exact, toc_total_effort, toc_two_group, ResourceFn};
use felix_core::games::npd::cg_pd_threshold;
use felix_core::games::two_player::{
    coordination_classify, hawkdove_solve, pd2_classify, pd2_thresholds, ultimatum_solve,
    EquilibriumKind, Player,
};
use felix_core::games::{GameSpec, NpdParams};
use felix_core::happiness::generalized_gradient;
use felix_core::netgen::{make_complete, make_er_with, parse_edge_list};
use felix_core::rng::{stream, uniform, Purpose};
use felix_core::{solve_happiness, ProsocialityState, SocialGraph};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, GameName, GraphKindName, Kind, WealthDist};
use crate::error::ExpError;
use crate::row;
use crate::summary::{summarize_step, SummaryRow};
use crate::table::{Cell, Table};

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "FELIX_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    /// Set when some run failed to converge; the files are still complete.
    pub failure: Option<String>,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), ExpError> {
        std::fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
        for f in &self.files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| ExpError::io(&path, e))?;
        }
        Ok(())
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, ExpError> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            ExpError::Invalid(format!("{THREADS_VAR} must be a non-negative integer, got `{v}`"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExpError::Invalid(format!("cannot start worker pool: {e}")))
}

/// Validates `cfg`, runs it and returns the rendered files, manifest
/// included.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, ExpError> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = pool.install(|| match cfg.kind {
        Kind::Phase2p => run_phase(cfg),
        Kind::TocSweep => run_toc(cfg),
        Kind::CgPd | Kind::ErDynamics | Kind::WealthPd | Kind::Custom => run_dynamics(cfg),
    })?;
    out.files.push(OutputFile {
        name: "manifest.toml".into(),
        contents: cfg.manifest()?,
    });
    Ok(out)
}

fn fixed_graph(cfg: &ExperimentConfig) -> Result<Option<SocialGraph>, ExpError> {
    match cfg.graph.kind {
        GraphKindName::Complete => Ok(Some(make_complete(cfg.graph.n)?)),
        GraphKindName::File => {
            let path = cfg.graph.file.as_deref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
            Ok(Some(parse_edge_list(&text)?))
        }
        GraphKindName::ErdosRenyi => Ok(None),
    }
}

fn wealth_for(cfg: &ExperimentConfig, n: usize, replicate: u64) -> Result<Vec<f64>, ExpError> {
    let g = &cfg.game;
    match g.wealth {
        WealthDist::None => Ok(vec![0.0; n]),
        WealthDist::Uniform => {
            let mut rng = stream(cfg.seed, Purpose::Wealth, replicate);
            Ok((0..n).map(|_| uniform(&mut rng, g.wealth_lo, g.wealth_hi)).collect())
        }
        WealthDist::Explicit if g.wealth_values.len() == n => Ok(g.wealth_values.clone()),
        WealthDist::Explicit => Err(ExpError::Invalid(format!(
            "expected {n} wealth values, got {}",
            g.wealth_values.len()
        ))),
    }
}

fn game_for(cfg: &ExperimentConfig, wealth: Vec<f64>) -> GameSpec {
    let g = &cfg.game;
    match g.name {
        GameName::Pd => GameSpec::PrisonersDilemma(NpdParams::with_wealth(g.c, wealth)),
        GameName::WealthOnly => GameSpec::WealthOnly { wealth },
        GameName::HawkDove => GameSpec::HawkDove,
        GameName::Ultimatum => GameSpec::Ultimatum { refusable: true, grid: g.grid },
        GameName::Dictator => GameSpec::Ultimatum { refusable: false, grid: g.grid },
        GameName::Coordination => GameSpec::Coordination { eps: g.eps },
    }
}

struct Unit {
    mean_degree: Option<f64>,
    replicate: u64,
}

struct UnitResult {
    graph: SocialGraph,
    wealth: Vec<f64>,
    q0: Vec<f64>,
    traj: Trajectory,
}

fn run_unit(
    cfg: &ExperimentConfig,
    fixed: Option<&SocialGraph>,
    unit: &Unit,
) -> Result<UnitResult, ExpError> {
    let graph = match (fixed, unit.mean_degree) {
        (Some(g), _) => g.clone(),
        (None, Some(k)) => {
            let mut rng = stream(cfg.seed, Purpose::Graph, unit.replicate);
            make_er_with(cfg.graph.n, k, &mut rng)?
        }
        (None, None) => unreachable!("random graphs always carry a mean degree"),
    };
    let n = graph.n();
    let wealth = wealth_for(cfg, n, unit.replicate)?;
    let game = game_for(cfg, wealth.clone());
    let dyn_cfg = cfg.dynamics.core(cfg.seed);
    let q0 = cfg.init.spec().draw(&graph, dyn_cfg.q_max, cfg.seed, unit.replicate)?;
    let state = initial_state(&graph, q0.clone(), dyn_cfg.mode, dyn_cfg.q_max)?;
    let traj = run(&graph, &game, state, None, &dyn_cfg)?;
    Ok(UnitResult {
        graph,
        wealth,
        q0,
        traj,
    })
}

fn summary_cells(s: &SummaryRow) -> Vec<Cell> {
    row![s.mean_s, s.mean_pi, s.std_pi, s.mean_q]
}

fn run_dynamics(cfg: &ExperimentConfig) -> Result<RunOutput, ExpError> {
    let fixed = fixed_graph(cfg)?;
    let degrees: Vec<Option<f64>> = if cfg.kind == Kind::ErDynamics {
        cfg.graph.mean_degrees.iter().map(|k| Some(*k)).collect()
    } else {
        vec![None]
    };
    let units: Vec<Unit> = degrees
        .iter()
        .flat_map(|k| (0..cfg.replicates).map(move |r| Unit { mean_degree: *k, replicate: r }))
        .collect();
    let results: Vec<Result<UnitResult, ExpError>> =
        units.par_iter().map(|u| run_unit(cfg, fixed.as_ref(), u)).collect();
    let results: Vec<UnitResult> = results.into_iter().collect::<Result<_, _>>()?;

    let sweep = cfg.kind == Kind::ErDynamics;
    let lead: &[(&str, &str)] = if sweep {
        &[("mean_degree", "edges per node"), ("replicate", "index")]
    } else {
        &[("replicate", "index")]
    };
    let lead_cells = |u: &Unit| -> Vec<Cell> {
        match u.mean_degree {
            Some(k) => row![k, u.replicate],
            None => row![u.replicate],
        }
    };
    let cols = |rest: &[(&'static str, &'static str)]| -> Vec<(&'static str, &'static str)> {
        lead.iter().chain(rest).copied().collect()
    };
    let title = format!("felix {} {}", cfg.kind.name(), env!("CARGO_PKG_VERSION"));

    let mut traj_table = Table::new(
        &title,
        &cols(&[
            ("t", "step"),
            ("node", "index"),
            ("q", "1"),
            ("s", "strategy"),
            ("payoff", "payoff"),
            ("u", "payoff"),
            ("gradient", "payoff"),
        ]),
    );
    let mut summary_table = Table::new(
        &title,
        &cols(&[
            ("t", "step"),
            ("mean_s", "strategy"),
            ("mean_pi", "payoff"),
            ("std_pi", "payoff"),
            ("mean_q", "1"),
        ]),
    );
    let mut extra_cols = vec![
        ("steps", "step"),
        ("converged", "bool"),
        ("equilibrium_failures", "count"),
        ("mean_s", "strategy"),
        ("mean_pi", "payoff"),
        ("std_pi", "payoff"),
        ("mean_q", "1"),
    ];
    match cfg.kind {
        Kind::CgPd => extra_cols.extend([
            ("graphical_nc", "count"),
            ("initial_cooperators", "count"),
            ("final_cooperators", "count"),
            ("matched", "count"),
        ]),
        Kind::WealthPd => extra_cols.extend([
            ("selfish", "count"),
            ("selfish_node", "index"),
            ("selfish_wealth", "payoff"),
            ("w_max", "payoff"),
            ("in_interval", "bool"),
        ]),
        Kind::ErDynamics | Kind::Custom => {
            extra_cols.extend([("isolated", "count"), ("max_degree", "edges")])
        }
        _ => {}
    }
    let mut final_table = Table::new(&title, &cols(&extra_cols));

    let mut failures = Vec::new();
    for (unit, res) in units.iter().zip(&results) {
        let traj = &res.traj;
        if (!traj.converged && cfg.dynamics.require_convergence) || traj.equilibrium_failures > 0 {
            failures.push(match unit.mean_degree {
                Some(k) => format!("mean degree {k} replicate {}", unit.replicate),
                None => format!("replicate {}", unit.replicate),
            });
        }
        for rec in &traj.records {
            if cfg.output.trajectory {
                for i in 0..rec.q.len() {
                    let mut r = lead_cells(unit);
                    r.extend(row![
                        rec.t,
                        i,
                        rec.q[i],
                        rec.s[i],
                        rec.payoffs[i],
                        rec.u[i],
                        rec.gradient[i]
                    ]);
                    traj_table.push(r);
                }
            }
            let mut r = lead_cells(unit);
            r.push(rec.t.into());
            r.extend(summary_cells(&summarize_step(rec)));
            summary_table.push(r);
        }
        let last = traj.last();
        let mut r = lead_cells(unit);
        r.extend(row![traj.steps, traj.converged, traj.equilibrium_failures]);
        r.extend(summary_cells(&summarize_step(last)));
        match cfg.kind {
            Kind::CgPd => r.extend(cg_pd_columns(cfg, res)?),
            Kind::WealthPd => r.extend(wealth_columns(cfg, res)),
            Kind::ErDynamics | Kind::Custom => {
                r.extend(row![res.graph.isolated_nodes().len(), res.graph.max_degree()])
            }
            _ => {}
        }
        final_table.push(r);
    }

    let mut files = Vec::new();
    if cfg.output.trajectory {
        files.push(file("trajectory.csv", traj_table));
    }
    files.push(file("summary.csv", summary_table));
    files.push(file("final.csv", final_table));
    if sweep {
        files.push(file("sweep.csv", degree_sweep(cfg, &title, &units, &results)));
    }
    if cfg.kind == Kind::CgPd {
        files.push(file("threshold.csv", threshold_table(cfg, &title, &results[0])?));
    }
    let failure = (!failures.is_empty())
        .then(|| format!("{} run(s) did not settle: {}", failures.len(), failures.join(", ")));
    Ok(RunOutput { files, failure })
}

fn file(name: &str, table: Table) -> OutputFile {
    OutputFile {
        name: name.into(),
        contents: table.into_string(),
    }
}

fn sorted_desc(q: &[f64]) -> Vec<f64> {
    let mut v = q.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn cg_pd_columns(cfg: &ExperimentConfig, res: &UnitResult) -> Result<Vec<Cell>, ExpError> {
    let n = res.graph.n();
    let sorted = sorted_desc(&res.q0);
    let nc = graphical_nc(&sorted, n, cfg.game.c)?;
    let first = &res.traj.records[0];
    let last = res.traj.last();
    let count = |s: &[f64]| s.iter().filter(|x| **x == 1.0).count();
    // predicted: the nc highest initial values rise, the rest fall
    let cut = if nc > 0 { sorted[nc - 1] } else { f64::INFINITY };
    let matched = (0..n)
        .filter(|&i| (res.q0[i] >= cut) == (last.q[i] > res.q0[i]))
        .count();
    Ok(row![nc, count(&first.s), count(&last.s), matched])
}

fn wealth_columns(cfg: &ExperimentConfig, res: &UnitResult) -> Vec<Cell> {
    let last = res.traj.last();
    let selfish: Vec<usize> = (0..last.q.len()).filter(|&i| last.q[i] < 0.5).collect();
    let w_max = res.wealth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match selfish.as_slice() {
        [i] => {
            let w = res.wealth[*i];
            let inside = w >= w_max - 1.0 - cfg.game.c && w <= w_max;
            row![1usize, *i as u64, w, w_max, inside]
        }
        _ => vec![
            Cell::from(selfish.len()),
            Cell::Int(-1),
            Cell::Float(f64::NAN),
            Cell::from(w_max),
            Cell::from(false),
        ],
    }
}

fn degree_sweep(cfg: &ExperimentConfig, title: &str, units: &[Unit], results: &[UnitResult]) -> Table {
    let mut t = Table::new(
        title,
        &[
            ("mean_degree", "edges per node"),
            ("replicates", "count"),
            ("mean_s", "strategy"),
            ("mean_pi", "payoff"),
            ("mean_q", "1"),
            ("std_pi", "payoff"),
        ],
    );
    for k in &cfg.graph.mean_degrees {
        let rows: Vec<SummaryRow> = units
            .iter()
            .zip(results)
            .filter(|(u, _)| u.mean_degree == Some(*k))
            .map(|(_, r)| summarize_step(r.traj.last()))
            .collect();
        let m = rows.len() as f64;
        let avg = |f: fn(&SummaryRow) -> f64| rows.iter().map(f).sum::<f64>() / m;
        t.push(row![
            *k,
            rows.len(),
            avg(|r| r.mean_s),
            avg(|r| r.mean_pi),
            avg(|r| r.mean_q),
            avg(|r| r.std_pi)
        ]);
    }
    t
}

fn threshold_table(cfg: &ExperimentConfig, title: &str, first: &UnitResult) -> Result<Table, ExpError> {
    let n = first.graph.n();
    let sorted = sorted_desc(&first.q0);
    let mut t = Table::new(
        title,
        &[("n_c", "count"), ("q_c", "1"), ("q_r", "1")],
    );
    for n_c in 1..=n {
        t.push(row![n_c, cg_pd_threshold(n, n_c, cfg.game.c)?, sorted[n_c - 1]]);
    }
    Ok(t)
}

fn profile_code(s: [f64; 2]) -> &'static str {
    let kind = match (s[0] == 1.0, s[1] == 1.0) {
        (false, false) => EquilibriumKind::Nash,
        (true, true) => EquilibriumKind::Benevolent,
        (true, false) => EquilibriumKind::Asymmetric { altruist: Player::One },
        (false, true) => EquilibriumKind::Asymmetric { altruist: Player::Two },
    };
    kind.code()
}

/// Runs the two-node prisoner's dilemma dynamics from `(q1, q2)` and labels
/// the end state by the strategies played.
pub fn simulate_pd_cell(
    cfg: &ExperimentConfig,
    q1: f64,
    q2: f64,
    c: f64,
) -> Result<(&'static str, [f64; 2], usize, bool), ExpError> {
    let graph = SocialGraph::from_edges(2, [(0, 1)])?;
    let game = GameSpec::PrisonersDilemma(NpdParams::new(c));
    let mut dyn_cfg = cfg.dynamics.core(cfg.seed);
    dyn_cfg.record_every = 0;
    let state = initial_state(&graph, vec![q1, q2], dyn_cfg.mode, dyn_cfg.q_max)?;
    let traj = run(&graph, &game, state, None, &dyn_cfg)?;
    let last = traj.last();
    Ok((
        profile_code([last.s[0], last.s[1]]),
        [last.q[0], last.q[1]],
        traj.steps,
        traj.converged,
    ))
}

/// Cell centers of an `m`-cell partition of `(0, 1)`.
pub fn cell_centers(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
}

fn run_phase(cfg: &ExperimentConfig) -> Result<RunOutput, ExpError> {
    let p = &cfg.phase;
    let title = format!("felix phase2p {}", env!("CARGO_PKG_VERSION"));
    let xs = cell_centers(p.nx);
    let ys = cell_centers(p.ny);
    let mut summary = Table::new(&title, &[("key", "name"), ("value", "count or fraction")]);
    let mut counts: std::collections::BTreeMap<String, usize> = Default::default();

    let table = match cfg.game.name {
        GameName::Pd => {
            let rows: Vec<Result<Vec<Vec<Cell>>, ExpError>> = ys
                .par_iter()
                .map(|&c| {
                    xs.iter()
                        .map(|&q1| {
                            let analytic = pd2_classify(q1, p.q2, c)?.kind.code();
                            let (lo, hi) = pd2_thresholds(q1, p.q2);
                            let boundary = (c - lo).abs() < p.boundary || (c - hi).abs() < p.boundary;
                            let mut r = row![q1, c, p.q2, analytic, boundary];
                            if p.simulate {
                                let (label, q, steps, conv) = simulate_pd_cell(cfg, q1, p.q2, c)?;
                                r.extend(row![label, q[0], q[1], steps, conv]);
                            }
                            Ok(r)
                        })
                        .collect()
                })
                .collect();
            let mut cols = vec![
                ("q1", "1"),
                ("c", "payoff"),
                ("q2", "1"),
                ("analytic", "label"),
                ("boundary", "bool"),
            ];
            if p.simulate {
                cols.extend([
                    ("simulated", "label"),
                    ("q1_final", "1"),
                    ("q2_final", "1"),
                    ("steps", "step"),
                    ("converged", "bool"),
                ]);
            }
            let mut t = Table::new(&title, &cols);
            let (mut inner, mut agree, mut unsettled) = (0usize, 0usize, 0usize);
            for r in rows {
                for r in r? {
                    if let Cell::Text(label) = &r[3] {
                        *counts.entry(label.clone()).or_default() += 1;
                    }
                    if p.simulate {
                        if r[9] == Cell::Int(0) {
                            unsettled += 1;
                        }
                        if r[4] == Cell::Int(0) {
                            inner += 1;
                            agree += usize::from(r[3] == r[5]);
                        }
                    }
                    t.push(r);
                }
            }
            if p.simulate {
                summary.push(row!["interior_cells", inner]);
                summary.push(row!["agreement", agree as f64 / inner.max(1) as f64]);
                summary.push(row!["unsettled_cells", unsettled]);
            }
            t
        }
        GameName::HawkDove => {
            let mut t = Table::new(&title, &[("q1", "1"), ("q2", "1"), ("equilibria", "profiles")]);
            for &q2 in &ys {
                for &q1 in &xs {
                    let eqs = hawkdove_solve(q1, q2)?;
                    let text: Vec<String> =
                        eqs.iter().map(|s| format!("{}{}", s[0] as u8, s[1] as u8)).collect();
                    let label = text.join("|");
                    *counts.entry(label.clone()).or_default() += 1;
                    t.push(row![q1, q2, label]);
                }
            }
            t
        }
        GameName::Ultimatum | GameName::Dictator => {
            let refusable = cfg.game.name == GameName::Ultimatum;
            let mut t = Table::new(
                &title,
                &[
                    ("q1", "1"),
                    ("q2", "1"),
                    ("kept", "share"),
                    ("accepted", "bool"),
                    ("u1", "payoff"),
                    ("u2", "payoff"),
                    ("limit", "label"),
                ],
            );
            for &q2 in &ys {
                for &q1 in &xs {
                    let o = ultimatum_solve(q1, q2, refusable)?;
                    *counts.entry(o.limit.code().to_string()).or_default() += 1;
                    t.push(row![q1, q2, o.kept, o.accepted, o.u1, o.u2, o.limit.code()]);
                }
            }
            t
        }
        GameName::Coordination => {
            let mut t = Table::new(
                &title,
                &[("q1", "1"), ("q2", "1"), ("coefficient", "payoff"), ("limit", "label")],
            );
            for &q2 in &ys {
                for &q1 in &xs {
                    let o = coordination_classify(q1, q2, cfg.game.eps)?;
                    let coef = felix_core::games::two_player::coordination_coefficient(q1, q2);
                    *counts.entry(o.limit.code().to_string()).or_default() += 1;
                    t.push(row![q1, q2, coef, o.limit.code()]);
                }
            }
            t
        }
        GameName::WealthOnly => unreachable!("rejected by validation"),
    };
    for (label, n) in counts {
        summary.push(row![format!("count_{label}"), n]);
    }
    Ok(RunOutput {
        files: vec![file("phase.csv", table), file("summary.csv", summary)],
        failure: None,
    })
}

fn run_toc(cfg: &ExperimentConfig) -> Result<RunOutput, ExpError> {
    let cm = &cfg.commons;
    let v = cm.vspec();
    let form = cm.sigma_form();
    let title = format!(
        "felix toc_sweep {}; efforts in V/|V'|, payoffs in V^2/|V'| at the equilibrium total effort",
        env!("CARGO_PKG_VERSION")
    );
    let mut cols = vec![
        ("q", "1"),
        ("sigma", "1"),
        ("total_effort", "S"),
        ("effort_c", "V/|V'|"),
        ("effort_d", "V/|V'|"),
        ("mean_effort", "V/|V'|"),
        ("payoff_c", "V^2/|V'|"),
        ("payoff_d", "V^2/|V'|"),
        ("u_c", "V^2/|V'|"),
        ("u_d", "V^2/|V'|"),
        ("grad_c", "V^2/|V'|"),
        ("grad_d", "V^2/|V'|"),
    ];
    if cm.check_solver {
        cols.extend([("solver_grad_c", "V^2/|V'|"), ("solver_grad_d", "V^2/|V'|")]);
    }
    let graph = if cm.check_solver { Some(make_complete(cm.n)?) } else { None };
    let qs: Vec<f64> = (0..cm.q_steps).map(|k| k as f64 / cm.q_steps as f64).collect();
    let rows: Vec<Result<Vec<Cell>, ExpError>> = qs
        .par_iter()
        .map(|&q| {
            let o = toc_two_group(cm.n, cm.n_c, q, &v, form)?;
            let mut r = row![
                q,
                o.sigma,
                o.total_effort,
                o.effort_c,
                o.effort_d,
                o.mean_effort,
                o.payoff_c,
                o.payoff_d,
                o.happiness_c,
                o.happiness_d,
                o.gradient_c,
                o.gradient_d
            ];
            if let Some(g) = &graph {
                let (gc, gd) = solver_gradients(g, cm.n_c, q, &v, o.sigma, o.total_effort)?;
                r.extend(row![gc / o.happiness_unit, gd / o.happiness_unit]);
            }
            Ok(r)
        })
        .collect();
    let mut t = Table::new(&title, &cols);
    for r in rows {
        t.push(r?);
    }
    let mut summary = Table::new(&title, &[("key", "name"), ("value", "1 or S")]);
    let qc = toc_qc(cm.n, cm.n_c).map(Cell::from).unwrap_or(Cell::Float(f64::NAN));
    let qc_exact = toc_qc_exact(cm.n, cm.n_c).map(Cell::from).unwrap_or(Cell::Float(f64::NAN));
    summary.push(vec!["q_c".into(), qc]);
    summary.push(vec!["q_c_exact".into(), qc_exact]);
    summary.push(row!["selfish_total_effort", toc_total_effort(&v, cm.n as f64)?]);
    summary.push(row!["optimal_total_effort", toc_total_effort(&v, 1.0)?]);
    Ok(RunOutput {
        files: vec![file("toc.csv", t), file("summary.csv", summary)],
        failure: None,
    })
}

/// Gradients of a prosocial and a selfish node from the generic solver, with
/// the first `n_c` nodes at `q` exerting `sigma` times the selfish effort.
pub fn solver_gradients<V: ResourceFn + ?Sized>(
    graph: &SocialGraph,
    n_c: usize,
    q: f64,
    v: &V,
    sigma: f64,
    total: f64,
) -> Result<(f64, f64), ExpError> {
    let n = graph.n();
    let unit = v.value(total) / v.slope(total).abs();
    let mut qs = vec![q; n_c];
    qs.resize(n, 0.0);
    let state = ProsocialityState::generalized(graph, qs, felix_core::DEFAULT_Q_MAX)?;
    let efforts: Vec<f64> = (0..n).map(|i| if i < n_c { sigma * unit } else { unit }).collect();
    let s: f64 = efforts.iter().sum();
    let payoffs: Vec<f64> = efforts.iter().map(|e| e * v.value(s)).collect();
    let sol = solve_happiness(graph, &state, &payoffs)?;
    let gc = generalized_gradient(graph, &state, &payoffs, &sol.u, 0)?.value;
    let gd = generalized_gradient(graph, &state, &payoffs, &sol.u, n - 1)?.value;
    Ok((gc, gd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::summarize;
    use felix_core::dynamics::StepRecord;

    fn rows(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    }

    #[test]
    fn centers_avoid_the_edges() {
        assert_eq!(cell_centers(4), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn summary_is_recomputable_from_the_trajectory_file() {
        let cfg = ExperimentConfig::parse(
            "kind = \"cg_pd\"\nreplicates = 2\n[graph]\nn = 6\n[dynamics]\nmax_steps = 40\nrequire_convergence = false\n",
        )
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        let traj = rows(out.file("trajectory.csv").unwrap());
        let summary = rows(out.file("summary.csv").unwrap());
        let f = |s: &String| s.parse::<f64>().unwrap();
        let mut records: Vec<StepRecord> = Vec::new();
        for r in &traj {
            let t: usize = r[1].parse().unwrap();
            if records.last().is_none_or(|x| x.t != t || r[2] == "0") {
                records.push(StepRecord {
                    t,
                    q: vec![],
                    s: vec![],
                    payoffs: vec![],
                    u: vec![],
                    gradient: vec![],
                });
            }
            let rec = records.last_mut().unwrap();
            rec.q.push(f(&r[3]));
            rec.s.push(f(&r[4]));
            rec.payoffs.push(f(&r[5]));
            rec.u.push(f(&r[6]));
            rec.gradient.push(f(&r[7]));
        }
        let again = summarize(&records);
        assert_eq!(again.len(), summary.len());
        for (a, s) in again.iter().zip(&summary) {
            let expect = [a.mean_s, a.mean_pi, a.std_pi, a.mean_q].map(crate::table::fmt_f64);
            assert_eq!(&s[2..], &expect[..]);
        }
    }

    #[test]
    fn wealth_draws_follow_the_replicate() {
        let mut cfg = ExperimentConfig::parse("kind = \"wealth_pd\"\n[game]\nwealth = \"uniform\"\n").unwrap();
        cfg.seed = 3;
        let a = wealth_for(&cfg, 5, 0).unwrap();
        assert_eq!(a, wealth_for(&cfg, 5, 0).unwrap());
        assert_ne!(a, wealth_for(&cfg, 5, 1).unwrap());
        assert!(a.iter().all(|w| (0.0..3.0).contains(w)));
    }
}
