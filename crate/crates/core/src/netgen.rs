//! Seeded construction of interaction graphs and the edge-list text format.
//!
//! Edge-list files start with a header line `n <count>` followed by one
//! `i j` pair per line, zero-indexed, `i < j`, in ascending order. Blank
//! lines and lines starting with `#` are ignored on import.

use std::fmt::Write as _;

use rand::RngCore;

use crate::error::{FelixError, Result};
use crate::graph::SocialGraph;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Complete,
    ErdosRenyi { mean_degree: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub n: usize,
    pub seed: u64,
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GraphKind::Complete if self.n < 2 => Err(FelixError::InvalidParameter(format!(
                "complete graph needs n >= 2, got {}",
                self.n
            ))),
            GraphKind::ErdosRenyi { mean_degree }
                if !(mean_degree > 0.0 && mean_degree < self.n as f64) =>
            {
                Err(FelixError::InvalidParameter(format!(
                    "mean degree must lie in (0, n) = (0, {}), got {mean_degree}",
                    self.n
                )))
            }
            _ => Ok(()),
        }
    }

    /// Builds replicate `replicate` of this graph family.
    pub fn build(&self, replicate: u64) -> Result<SocialGraph> {
        self.validate()?;
        match self.kind {
            GraphKind::Complete => make_complete(self.n),
            GraphKind::ErdosRenyi { mean_degree } => {
                let mut rng = rng::stream(self.seed, Purpose::Graph, replicate);
                make_er_with(self.n, mean_degree, &mut rng)
            }
        }
    }
}

pub fn make_complete(n: usize) -> Result<SocialGraph> {
    if n < 2 {
        return Err(FelixError::InvalidParameter(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    SocialGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// Erdős–Rényi graph: each pair is kept independently with probability
/// `mean_degree / (n - 1)`, capped at 1. Isolated nodes are kept; query them
/// with [`SocialGraph::isolated_nodes`].
pub fn make_er(n: usize, mean_degree: f64, seed: u64) -> Result<SocialGraph> {
    let mut rng = rng::stream(seed, Purpose::Graph, 0);
    make_er_with(n, mean_degree, &mut rng)
}

/// Same as [`make_er`] with a caller-supplied generator. Pairs are visited in
/// ascending lexicographic order and each consumes exactly one draw.
pub fn make_er_with<R: RngCore>(n: usize, mean_degree: f64, rng: &mut R) -> Result<SocialGraph> {
    if n < 2 || !(mean_degree > 0.0 && mean_degree < n as f64) {
        return Err(FelixError::InvalidParameter(format!(
            "need n >= 2 and 0 < mean degree < n, got n={n}, mean degree={mean_degree}"
        )));
    }
    let p = (mean_degree / (n - 1) as f64).min(1.0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng::unit_f64(rng) < p {
                edges.push((i, j));
            }
        }
    }
    SocialGraph::from_edges(n, edges)
}

pub fn to_edge_list(graph: &SocialGraph) -> String {
    let mut out = format!("n {}\n", graph.n());
    for (i, j) in graph.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<SocialGraph> {
    let bad = |line: usize, msg: &str| FelixError::InvalidGraph(format!("line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| FelixError::InvalidGraph("empty edge list".into()))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", count] => count
            .parse::<usize>()
            .map_err(|_| bad(hline, "node count is not an integer"))?,
        _ => return Err(bad(hline, "expected header `n <count>`")),
    };
    let mut edges = Vec::new();
    for (k, line) in lines {
        let mut it = line.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(bad(k, "expected `i j`")),
        };
        let a = a.parse().map_err(|_| bad(k, "node id is not an integer"))?;
        let b = b.parse().map_err(|_| bad(k, "node id is not an integer"))?;
        edges.push((a, b));
    }
    SocialGraph::from_edges(n, edges)
}
