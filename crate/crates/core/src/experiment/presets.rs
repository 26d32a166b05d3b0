//! Named config lists for the standard sweeps and coherence-fit tables.
//!
//! Every preset is fully specified, including seeds. Random topologies use
//! [`PRESET_SEED`] unless a helper takes an explicit seed.

use super::config::{ExperimentConfig, FitSpec, TopologySpec};
use crate::dynamics::EvolutionModel;
use crate::error::{Error, Result};
use crate::graph::NodePolicy;

pub const PRESET_NAMES: [&str; 6] = [
    "table1",
    "table2",
    "simple-n10",
    "complex-n100",
    "appendix-n50",
    "centrality-fig10",
];

/// Top-level seed for the random-graph presets.
pub const PRESET_SEED: u64 = 1;

const COMPLEX_N: usize = 100;
const AVG_DEGREE: f64 = 4.0;
const WS_K: usize = 4;
const WS_P_REWIRE: f64 = 0.1;
const BA_M: usize = 2;

/// The four simple cases of the small-graph sweeps. The star appears
/// twice, started on the hub and on a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleCase {
    Cycle,
    StarHub,
    StarPeripheral,
    Complete,
}

impl SimpleCase {
    pub const ALL: [SimpleCase; 4] = [
        SimpleCase::Cycle,
        SimpleCase::StarHub,
        SimpleCase::StarPeripheral,
        SimpleCase::Complete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimpleCase::Cycle => "cycle",
            SimpleCase::StarHub => "star_hub",
            SimpleCase::StarPeripheral => "star_peripheral",
            SimpleCase::Complete => "complete",
        }
    }

    pub fn config(self, n: usize, model: EvolutionModel) -> ExperimentConfig {
        let (topology, node) = match self {
            SimpleCase::Cycle => (TopologySpec::Cycle { n }, NodePolicy::Explicit { index: 0 }),
            // hub is node 0 and leaves are 1..n
            SimpleCase::StarHub => (TopologySpec::Star { n }, NodePolicy::HighestDegree),
            SimpleCase::StarPeripheral => (TopologySpec::Star { n }, NodePolicy::LowestDegree),
            SimpleCase::Complete => (TopologySpec::Complete { n }, NodePolicy::Explicit { index: 0 }),
        };
        let mut cfg = ExperimentConfig::new(topology, model, node);
        cfg.name = Some(format!("{}{n}_{}", self.name(), model.label()));
        cfg
    }
}

/// Random families of the N=100 experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexFamily {
    ErdosRenyi,
    SmallWorld,
    ScaleFree,
}

impl ComplexFamily {
    pub const ALL: [ComplexFamily; 3] = [
        ComplexFamily::ErdosRenyi,
        ComplexFamily::SmallWorld,
        ComplexFamily::ScaleFree,
    ];

    pub fn topology(self, n: usize) -> TopologySpec {
        match self {
            ComplexFamily::ErdosRenyi => TopologySpec::ErdosRenyi { n, avg_degree: AVG_DEGREE },
            ComplexFamily::SmallWorld => TopologySpec::WattsStrogatz { n, k: WS_K, p_rewire: WS_P_REWIRE },
            ComplexFamily::ScaleFree => TopologySpec::BarabasiAlbert { n, m: BA_M },
        }
    }

    /// Scale-free runs start on the hub; the homogeneous families on a
    /// seeded random node.
    pub fn policy(self) -> NodePolicy {
        match self {
            ComplexFamily::ScaleFree => NodePolicy::HighestDegree,
            _ => NodePolicy::Random { seed: 0 },
        }
    }

    pub fn config(self, n: usize, model: EvolutionModel, seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.topology(n), model, self.policy());
        cfg.seed = seed;
        cfg.name = Some(format!("{}{n}_{}_s{seed}", self.topology(n).family(), model.label()));
        cfg
    }
}

/// Coherence fits for the tables run from the l1 maximum to the end of the
/// grid: the walk starts with zero coherence, and only the part after the
/// build-up is a decay.
fn with_fit(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.fit = Some(FitSpec {
        from_peak: true,
        ..FitSpec::default()
    });
    cfg
}

fn with_occupations(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.emit_occupations = true;
    cfg
}

/// Coherence-decay fits on the N=10 simple graphs: 4 cases x {Haken–Strobl, QSW}.
pub fn table1() -> Vec<ExperimentConfig> {
    [EvolutionModel::haken_strobl(), EvolutionModel::qsw()]
        .into_iter()
        .flat_map(|m| SimpleCase::ALL.map(|c| with_fit(c.config(10, m))))
        .collect()
}

/// Coherence-decay fits on the N=100 random graphs for one seed.
pub fn table2_with_seed(seed: u64) -> Vec<ExperimentConfig> {
    [EvolutionModel::haken_strobl(), EvolutionModel::qsw()]
        .into_iter()
        .flat_map(|m| ComplexFamily::ALL.map(|f| with_fit(f.config(COMPLEX_N, m, seed))))
        .collect()
}

fn simple_sweep(n: usize) -> Vec<ExperimentConfig> {
    SimpleCase::ALL
        .into_iter()
        .flat_map(|c| EvolutionModel::defaults().map(|m| with_occupations(c.config(n, m))))
        .collect()
}

pub fn complex_n100() -> Vec<ExperimentConfig> {
    ComplexFamily::ALL
        .into_iter()
        .flat_map(|f| EvolutionModel::defaults().map(|m| f.config(COMPLEX_N, m, PRESET_SEED)))
        .collect()
}

/// Noiseless walks on one scale-free graph from four start nodes. The
/// explicit start is node 0, a member of the seed clique.
pub fn centrality_fig10() -> Vec<ExperimentConfig> {
    let topology = ComplexFamily::ScaleFree.topology(COMPLEX_N);
    [
        ("highest_degree", NodePolicy::HighestDegree),
        ("highest_closeness", NodePolicy::HighestCloseness),
        ("lowest_degree", NodePolicy::LowestDegree),
        ("explicit0", NodePolicy::Explicit { index: 0 }),
    ]
    .into_iter()
    .map(|(tag, policy)| {
        let mut cfg = ExperimentConfig::new(topology, EvolutionModel::Noiseless, policy);
        cfg.seed = PRESET_SEED;
        cfg.name = Some(format!("ba{COMPLEX_N}_{tag}"));
        with_occupations(cfg)
    })
    .collect()
}

pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    Ok(match name {
        "table1" => table1(),
        "table2" => table2_with_seed(PRESET_SEED),
        "simple-n10" => simple_sweep(10),
        "complex-n100" => complex_n100(),
        "appendix-n50" => simple_sweep(50),
        "centrality-fig10" => centrality_fig10(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset {other:?}; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn preset_sizes() {
        let sizes: Vec<usize> = PRESET_NAMES.iter().map(|n| preset(n).unwrap().len()).collect();
        assert_eq!(sizes, [8, 6, 16, 12, 16, 4]);
        assert!(preset("table3").is_err());
    }

    #[test]
    fn presets_are_valid_with_unique_labels() {
        for name in PRESET_NAMES {
            let configs = preset(name).unwrap();
            let labels: HashSet<String> = configs.iter().map(|c| c.label()).collect();
            assert_eq!(labels.len(), configs.len(), "{name}");
            for c in &configs {
                c.validate().unwrap();
            }
        }
    }

    #[test]
    fn complex_preset_starts_scale_free_on_hub() {
        for c in complex_n100() {
            assert_eq!(c.topology.n(), 100);
            if let TopologySpec::BarabasiAlbert { .. } = c.topology {
                assert_eq!(c.initial_node, NodePolicy::HighestDegree);
            }
        }
    }

    #[test]
    fn table_presets_fit_coherence() {
        for c in table1().into_iter().chain(table2_with_seed(3)) {
            let fit = c.fit.as_ref().unwrap();
            assert_eq!(fit.column, "l1_coherence");
            assert!(fit.from_peak);
            assert!(!c.model.has_spectral_solution());
        }
    }
}
