use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionModel, TimeGrid, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::graph::{self, Graph, NodePolicy};
use crate::metrics::{DqcMode, EntropyBase};

/// Graph family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum TopologySpec {
    #[serde(rename = "cycle")]
    Cycle { n: usize },
    #[serde(rename = "complete")]
    Complete { n: usize },
    #[serde(rename = "star")]
    Star { n: usize },
    #[serde(rename = "er")]
    ErdosRenyi { n: usize, avg_degree: f64 },
    #[serde(rename = "ws")]
    WattsStrogatz { n: usize, k: usize, p_rewire: f64 },
    #[serde(rename = "ba")]
    BarabasiAlbert { n: usize, m: usize },
}

impl TopologySpec {
    pub fn n(&self) -> usize {
        match *self {
            Self::Cycle { n }
            | Self::Complete { n }
            | Self::Star { n }
            | Self::ErdosRenyi { n, .. }
            | Self::WattsStrogatz { n, .. }
            | Self::BarabasiAlbert { n, .. } => n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Cycle { .. } => "cycle",
            Self::Complete { .. } => "complete",
            Self::Star { .. } => "star",
            Self::ErdosRenyi { .. } => "er",
            Self::WattsStrogatz { .. } => "ws",
            Self::BarabasiAlbert { .. } => "ba",
        }
    }

    /// Builds the graph. `seed` is only consumed by the random families.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match *self {
            Self::Cycle { n } => graph::build_cycle(n),
            Self::Complete { n } => graph::build_complete(n),
            Self::Star { n } => graph::build_star(n),
            Self::ErdosRenyi { n, avg_degree } => graph::build_erdos_renyi(n, avg_degree, seed),
            Self::WattsStrogatz { n, k, p_rewire } => {
                graph::build_watts_strogatz(n, k, p_rewire, seed)
            }
            Self::BarabasiAlbert { n, m } => graph::build_barabasi_albert(n, m, seed),
        }
    }
}

/// Column and window for the coherence-decay fit of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    #[serde(default = "default_fit_column")]
    pub column: String,
    /// `[t_min, t_max]`; the whole series when absent.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Start the fit at the largest value inside the window.
    #[serde(default)]
    pub from_peak: bool,
}

fn default_fit_column() -> String {
    "l1_coherence".into()
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            column: default_fit_column(),
            window: None,
            from_peak: false,
        }
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOL
}

/// One run, fully specified. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub topology: TopologySpec,
    pub model: EvolutionModel,
    pub initial_node: NodePolicy,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to [`TimeGrid::default_for`] the graph size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeGrid>,
    #[serde(default)]
    pub dqc_mode: DqcMode,
    #[serde(default)]
    pub entropy_base: EntropyBase,
    #[serde(default)]
    pub emit_occupations: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSpec>,
}

impl ExperimentConfig {
    pub fn new(topology: TopologySpec, model: EvolutionModel, initial_node: NodePolicy) -> Self {
        Self {
            name: None,
            topology,
            model,
            initial_node,
            seed: 0,
            time: None,
            dqc_mode: DqcMode::default(),
            entropy_base: EntropyBase::default(),
            emit_occupations: false,
            tolerance: DEFAULT_TOL,
            fit: None,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time.unwrap_or_else(|| TimeGrid::default_for(self.topology.n()))
    }

    /// Directory-friendly label, `name` when set.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!(
                "{}{}_{}",
                self.topology.family(),
                self.topology.n(),
                self.model.label()
            )
        })
    }

    /// Checks parameter ranges that do not need the graph.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.time_grid().validate()?;
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if let NodePolicy::Explicit { index } = self.initial_node {
            let n = self.topology.n();
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if let Some(FitSpec {
            window: Some([a, b]),
            ..
        }) = &self.fit
        {
            if !(a < b) {
                return Err(Error::InvalidParameter(format!("fit window [{a}, {b}] is empty")));
            }
        }
        Ok(())
    }
}

/// Stage identifiers for [`sub_seed`]. New stages get new numbers; existing
/// stages keep theirs so their streams never shift.
pub const SEED_STAGE_GRAPH: u64 = 0;
pub const SEED_STAGE_NODE: u64 = 1;

/// Per-stage seed: SplitMix64 of `seed + (stage + 1) * 0x9E3779B97F4A7C15`.
pub fn sub_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed.wrapping_add((stage + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
