//! Experiment configuration files.
//!
//! Configs are TOML with one table per concern. Every key has a default
//! except `kind`, and unknown keys are rejected. A resolved config (defaults
//! filled in, command-line overrides applied) is written back out as the run
//! manifest, which is itself a valid config.
//!
//! ```toml
//! kind = "er_dynamics"
//! seed = 7
//! replicates = 10
//!
//! [graph]
//! kind = "erdos_renyi"
//! n = 50
//! mean_degrees = [3.0, 5.0, 8.0]
//!
//! [game]
//! name = "pd"
//! c = 1.0
//!
//! [init]
//! dist = "single_seed"
//! node = 0
//! q0 = 0.6
//!
//! [dynamics]
//! rule = "ascent"
//! record_every = 50
//! ```

use std::path::{Path, PathBuf};

use felix_core::dynamics::{DynamicsConfig, InitSpec, UpdateRule};
use felix_core::games::commons::{SigmaForm, Vspec};
use felix_core::Mode;
use serde::{Deserialize, Serialize};

use crate::error::ExpError;

pub const KINDS: [&str; 6] = ["phase2p", "cg_pd", "er_dynamics", "wealth_pd", "toc_sweep", "custom"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Two-player phase diagrams.
    Phase2p,
    /// Prisoner's dilemma dynamics on the complete graph.
    CgPd,
    /// Prisoner's dilemma dynamics on random graphs, swept over mean degree.
    ErDynamics,
    /// Prisoner's dilemma with heterogeneous wealth on the complete graph.
    WealthPd,
    /// Two-group commons game over a prosociality grid.
    TocSweep,
    /// Any graph, game and initial condition.
    Custom,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Phase2p => "phase2p",
            Kind::CgPd => "cg_pd",
            Kind::ErDynamics => "er_dynamics",
            Kind::WealthPd => "wealth_pd",
            Kind::TocSweep => "toc_sweep",
            Kind::Custom => "custom",
        }
    }

    pub fn runs_dynamics(self) -> bool {
        matches!(self, Kind::CgPd | Kind::ErDynamics | Kind::WealthPd | Kind::Custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: u64,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub game: GameConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub commons: CommonsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Written into manifests; ignored on input apart from a version check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool: Option<ToolInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKindName {
    #[default]
    Complete,
    ErdosRenyi,
    /// Edge list in the export format.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default)]
    pub kind: GraphKindName,
    #[serde(default = "default_n")]
    pub n: usize,
    /// One run family per entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mean_degrees: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            kind: GraphKindName::Complete,
            n: default_n(),
            mean_degrees: Vec::new(),
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameName {
    #[default]
    Pd,
    WealthOnly,
    HawkDove,
    Ultimatum,
    Dictator,
    Coordination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WealthDist {
    #[default]
    None,
    Uniform,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(default)]
    pub name: GameName,
    /// Cooperation cost.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Coordination preference.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Offer grid of the ultimatum and dictator games.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub wealth: WealthDist,
    #[serde(default)]
    pub wealth_lo: f64,
    #[serde(default = "default_wealth_hi")]
    pub wealth_hi: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wealth_values: Vec<f64>,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            name: GameName::Pd,
            c: default_c(),
            eps: default_eps(),
            grid: default_grid(),
            wealth: WealthDist::None,
            wealth_lo: 0.0,
            wealth_hi: default_wealth_hi(),
            wealth_values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitDist {
    Constant,
    #[default]
    Uniform,
    SingleSeed,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default)]
    pub dist: InitDist,
    #[serde(default)]
    pub value: f64,
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    #[serde(default)]
    pub node: usize,
    #[serde(default = "default_q0")]
    pub q0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            dist: InitDist::Uniform,
            value: 0.0,
            lo: default_lo(),
            hi: default_hi(),
            node: 0,
            q0: default_q0(),
            values: Vec::new(),
        }
    }
}

impl InitConfig {
    pub fn spec(&self) -> InitSpec {
        match self.dist {
            InitDist::Constant => InitSpec::Constant(self.value),
            InitDist::Uniform => InitSpec::Uniform { lo: self.lo, hi: self.hi },
            InitDist::SingleSeed => InitSpec::SingleSeed { node: self.node, q0: self.q0 },
            InitDist::Explicit => InitSpec::Explicit(self.values.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Generalized,
    Selective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    #[default]
    Mixed,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(default = "default_lambda")]
    pub learning_rate: f64,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default)]
    pub rule: RuleName,
    /// Stride between recorded steps; 0 records only the endpoints.
    #[serde(default = "one_usize")]
    pub record_every: usize,
    /// Treat runs that hit `max_steps` as failures.
    #[serde(default = "yes")]
    pub require_convergence: bool,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            learning_rate: default_lambda(),
            q_max: default_q_max(),
            max_steps: default_max_steps(),
            tolerance: default_tolerance(),
            window: default_window(),
            mode: ModeName::Generalized,
            rule: RuleName::Mixed,
            record_every: 1,
            require_convergence: true,
        }
    }
}

impl DynamicsSection {
    pub fn core(&self, seed: u64) -> DynamicsConfig {
        DynamicsConfig {
            learning_rate: self.learning_rate,
            q_max: self.q_max,
            max_steps: self.max_steps,
            tolerance: self.tolerance,
            window: self.window,
            mode: match self.mode {
                ModeName::Generalized => Mode::Generalized,
                ModeName::Selective => Mode::Selective,
            },
            rule: match self.rule {
                RuleName::Mixed => UpdateRule::Mixed,
                RuleName::Ascent => UpdateRule::Ascent,
            },
            seed,
            record_every: self.record_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    /// Cells along `q1`.
    #[serde(default = "default_cells")]
    pub nx: usize,
    /// Cells along `c` (prisoner's dilemma) or `q2` (other games).
    #[serde(default = "default_cells")]
    pub ny: usize,
    /// Fixed `q2` of the prisoner's dilemma diagram.
    #[serde(default = "default_q2")]
    pub q2: f64,
    /// Also classify every cell by running the two-node dynamics.
    #[serde(default)]
    pub simulate: bool,
    /// Cells closer than this to a threshold curve count as boundary cells.
    #[serde(default = "default_boundary")]
    pub boundary: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            nx: default_cells(),
            ny: default_cells(),
            q2: default_q2(),
            simulate: false,
            boundary: default_boundary(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceName {
    #[default]
    Linear,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    #[default]
    Approximate,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonsConfig {
    #[serde(default = "default_commons_n")]
    pub n: usize,
    #[serde(default = "default_n_c")]
    pub n_c: usize,
    /// The grid is `q = k / q_steps` for `k < q_steps`.
    #[serde(default = "default_cells")]
    pub q_steps: usize,
    #[serde(default)]
    pub resource: ResourceName,
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default)]
    pub form: FormName,
    /// Recompute the gradients with the generic solver on the explicit graph.
    #[serde(default)]
    pub check_solver: bool,
}

impl Default for CommonsConfig {
    fn default() -> Self {
        CommonsConfig {
            n: default_commons_n(),
            n_c: default_n_c(),
            q_steps: default_cells(),
            resource: ResourceName::Linear,
            s0: default_s0(),
            exponent: default_exponent(),
            form: FormName::Approximate,
            check_solver: false,
        }
    }
}

impl CommonsConfig {
    pub fn vspec(&self) -> Vspec {
        match self.resource {
            ResourceName::Linear => Vspec::Linear { s0: self.s0 },
            ResourceName::Power => Vspec::Power { s0: self.s0, exponent: self.exponent },
        }
    }

    pub fn sigma_form(&self) -> SigmaForm {
        match self.form {
            FormName::Approximate => SigmaForm::Approximate,
            FormName::Exact => SigmaForm::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Write the per-node trajectory file.
    #[serde(default = "yes")]
    pub trajectory: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out(),
            trajectory: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn one() -> u64 {
    1
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_n() -> usize {
    20
}
fn default_c() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.25
}
fn default_grid() -> usize {
    101
}
fn default_wealth_hi() -> f64 {
    3.0
}
fn default_lo() -> f64 {
    0.25
}
fn default_hi() -> f64 {
    0.75
}
fn default_q0() -> f64 {
    0.6
}
fn default_lambda() -> f64 {
    0.01
}
fn default_q_max() -> f64 {
    felix_core::DEFAULT_Q_MAX
}
fn default_max_steps() -> usize {
    100_000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_window() -> usize {
    10
}
fn default_cells() -> usize {
    100
}
fn default_q2() -> f64 {
    0.4
}
fn default_boundary() -> f64 {
    0.01
}
fn default_commons_n() -> usize {
    100
}
fn default_n_c() -> usize {
    30
}
fn default_s0() -> f64 {
    1.0
}
fn default_exponent() -> f64 {
    1.0
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
    pub out: Option<PathBuf>,
    pub graph_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses config text. Unknown kinds and malformed files are told apart
    /// so the CLI can report them with different exit codes.
    pub fn parse(text: &str) -> Result<Self, ExpError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ExpError::Config(e.to_string()))?;
        match table.get("kind") {
            None => return Err(ExpError::Config("missing key `kind`".into())),
            Some(toml::Value::String(k)) if !KINDS.contains(&k.as_str()) => {
                return Err(ExpError::UnknownKind(k.clone()))
            }
            Some(toml::Value::String(_)) => {}
            Some(other) => {
                return Err(ExpError::Config(format!("`kind` must be a string, got {other}")))
            }
        }
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e: toml::de::Error| ExpError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExpError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
        if let Some(r) = ov.replicates {
            self.replicates = r;
        }
        if let Some(dir) = &ov.out {
            self.output.dir = dir.clone();
        }
        if let Some(file) = &ov.graph_file {
            self.graph.kind = GraphKindName::File;
            self.graph.file = Some(file.clone());
        }
    }

    /// Manifest text: this config with the current tool version attached.
    pub fn manifest(&self) -> Result<String, ExpError> {
        let mut cfg = self.clone();
        cfg.tool = Some(ToolInfo::current());
        toml::to_string(&cfg).map_err(|e| ExpError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        let bad = |msg: String| Err(ExpError::Invalid(msg));
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed must be at most {}", i64::MAX));
        }
        if self.replicates == 0 || self.replicates > i64::MAX as u64 {
            return bad("replicates must be positive".into());
        }
        if let Some(tool) = &self.tool {
            let now = ToolInfo::current();
            if tool.name != now.name {
                return bad(format!("manifest was written by `{}`", tool.name));
            }
        }
        let g = &self.graph;
        match g.kind {
            GraphKindName::Complete if g.n < 2 => return bad("complete graph needs n >= 2".into()),
            GraphKindName::ErdosRenyi => {
                if g.mean_degrees.is_empty() {
                    return bad("erdos_renyi graphs need `mean_degrees`".into());
                }
                if let Some(k) =
                    g.mean_degrees.iter().find(|k| !(**k > 0.0 && **k < g.n as f64))
                {
                    return bad(format!("mean degree {k} outside (0, {})", g.n));
                }
            }
            GraphKindName::File if g.file.is_none() => {
                return bad("graph kind `file` needs `file`".into())
            }
            _ => {}
        }
        let game = &self.game;
        if !(game.c.is_finite() && game.c > 0.0) {
            return bad(format!("cooperation cost must be positive, got {}", game.c));
        }
        match game.wealth {
            WealthDist::Uniform if !(game.wealth_lo <= game.wealth_hi) => {
                return bad("wealth_lo must not exceed wealth_hi".into())
            }
            WealthDist::Explicit if game.wealth_values.iter().any(|w| !w.is_finite()) => {
                return bad("wealth values must be finite".into())
            }
            _ => {}
        }
        if self.kind.runs_dynamics() {
            self.dynamics.core(self.seed).validate().map_err(ExpError::from)?;
        }
        match self.kind {
            Kind::Phase2p => {
                let p = &self.phase;
                if p.nx == 0 || p.ny == 0 {
                    return bad("phase grid needs nx, ny >= 1".into());
                }
                if !(0.0..1.0).contains(&p.q2) {
                    return bad(format!("q2 must lie in [0, 1), got {}", p.q2));
                }
                if p.simulate && game.name != GameName::Pd {
                    return bad("simulated phase diagrams are only defined for the pd game".into());
                }
                if !matches!(
                    game.name,
                    GameName::Pd
                        | GameName::HawkDove
                        | GameName::Ultimatum
                        | GameName::Dictator
                        | GameName::Coordination
                ) {
                    return bad("phase2p needs a two-player game".into());
                }
                if game.name == GameName::Coordination && !(0.0..0.5).contains(&game.eps) {
                    return bad(format!("eps must lie in [0, 1/2), got {}", game.eps));
                }
            }
            Kind::CgPd | Kind::WealthPd => {
                if g.kind != GraphKindName::Complete {
                    return bad(format!("{} runs on the complete graph", self.kind.name()));
                }
                if game.name != GameName::Pd {
                    return bad(format!("{} plays the pd game", self.kind.name()));
                }
                if self.kind == Kind::CgPd && game.wealth != WealthDist::None {
                    return bad("cg_pd has no wealth; use wealth_pd".into());
                }
                if self.kind == Kind::WealthPd && game.wealth == WealthDist::None {
                    return bad("wealth_pd needs a wealth distribution".into());
                }
            }
            Kind::ErDynamics => {
                if g.kind != GraphKindName::ErdosRenyi {
                    return bad("er_dynamics needs an erdos_renyi graph".into());
                }
                if game.name != GameName::Pd {
                    return bad("er_dynamics plays the pd game".into());
                }
            }
            Kind::TocSweep => {
                let cm = &self.commons;
                if cm.n < 2 || cm.n_c == 0 || cm.n_c >= cm.n {
                    return bad(format!("need 1 <= n_c < n, got n={}, n_c={}", cm.n, cm.n_c));
                }
                if cm.q_steps == 0 {
                    return bad("q_steps must be positive".into());
                }
                cm.vspec().validate().map_err(ExpError::from)?;
            }
            Kind::Custom => {}
        }
        Ok(())
    }
}
