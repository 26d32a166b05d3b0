use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{sub_seed, ExperimentConfig, FitSpec, SEED_STAGE_GRAPH, SEED_STAGE_NODE};
use crate::dynamics::{self, EvolveOptions, SpectralDecomposition, Trajectory};
use crate::error::Error;
use crate::fit::{fit_stretched_exponential, fit_window, FitOptions, FitReport, FitResult};
use crate::graph::{laplacian, select_node, Graph, NodePolicy};
use crate::metrics::{metric_series, MetricRecord};
use crate::state::localized_state;

pub const ENGINE_VERSION: &str = concat!("ctqw-core ", env!("CARGO_PKG_VERSION"));

pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GRAPH_FILE: &str = "graph.json";
pub const FIT_FILE: &str = "fit.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Graph,
    NodeSelection,
    Evolution,
    Metrics,
    Fit,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Graph => "graph",
            Stage::NodeSelection => "node selection",
            Stage::Evolution => "evolution",
            Stage::Metrics => "metrics",
            Stage::Fit => "fit",
            Stage::Output => "output",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{stage} stage failed: {source}")]
    Model {
        stage: Stage,
        #[source]
        source: Error,
    },
    #[error("output stage failed on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed input {path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },
}

impl ExperimentError {
    fn at(stage: Stage) -> impl FnOnce(Error) -> Self {
        move |source| Self::Model { stage, source }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for numeric failures, 4 for partial
    /// sweeps, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model {
                stage: Stage::Config | Stage::NodeSelection,
                ..
            } => 2,
            Self::Model {
                source: Error::InvalidParameter(_) | Error::InvalidSize { .. },
                ..
            } => 2,
            Self::Model { .. } => 3,
            Self::Input { .. } => 2,
            Self::PartialSweep { .. } => 4,
            Self::Io { .. } => 1,
        }
    }
}

pub type ExperimentResult<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Dump every sampled state under `snapshots/`.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub initial_node: usize,
    pub graph_hash: String,
    pub graph_seed: u64,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<String>,
    pub engine_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub graph: Graph,
    pub records: Vec<MetricRecord>,
    pub fit: Option<FitResult>,
}

/// Graph and initial node of `config`, before any dynamics.
pub fn resolve(config: &ExperimentConfig) -> ExperimentResult<(Graph, usize)> {
    config.validate().map_err(ExperimentError::at(Stage::Config))?;
    let graph = config
        .topology
        .build(sub_seed(config.seed, SEED_STAGE_GRAPH))
        .map_err(ExperimentError::at(Stage::Graph))?;
    let policy = match config.initial_node {
        NodePolicy::Random { seed } => NodePolicy::Random {
            seed: sub_seed(config.seed, SEED_STAGE_NODE).wrapping_add(seed),
        },
        other => other,
    };
    let initial = select_node(&graph, policy).map_err(ExperimentError::at(Stage::NodeSelection))?;
    Ok((graph, initial))
}

/// In-memory result of one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub graph: Graph,
    pub initial: usize,
    pub trajectory: Trajectory,
    pub records: Vec<MetricRecord>,
}

/// Runs `config` without touching disk.
pub fn simulate(config: &ExperimentConfig) -> ExperimentResult<Simulation> {
    let (graph, initial) = resolve(config)?;
    let l = laplacian(&graph);
    let spec = SpectralDecomposition::new(&l).map_err(ExperimentError::at(Stage::Evolution))?;
    let rho0 = localized_state(graph.n(), initial).map_err(ExperimentError::at(Stage::Evolution))?;
    let grid = config.time_grid();
    let opts = EvolveOptions {
        tol: config.tolerance,
        check_positivity: false,
    };
    let trajectory = if config.model.has_spectral_solution() {
        dynamics::evolve_with_spectrum(config.model, &spec, &rho0, &grid, opts)
    } else {
        dynamics::integrate_master_equation(config.model, &l, &rho0, &grid, opts)
    }
    .map_err(ExperimentError::at(Stage::Evolution))?;

    // the entropy rejects eigenvalues below -1e-9, which doubles as the
    // positivity check on every sample
    let records = metric_series(&trajectory, &spec, initial, config.dqc_mode, config.entropy_base)
        .map_err(ExperimentError::at(Stage::Metrics))?;
    Ok(Simulation {
        graph,
        initial,
        trajectory,
        records,
    })
}

/// Runs one experiment and writes its artifacts into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, opts: RunOptions) -> ExperimentResult<RunOutcome> {
    let started = Instant::now();
    let Simulation {
        graph,
        initial,
        trajectory,
        records,
    } = simulate(config)?;

    let fit = match &config.fit {
        Some(spec) => Some(fit_records(&records, spec).map_err(ExperimentError::at(Stage::Fit))?),
        None => None,
    };

    fs::create_dir_all(out_dir).map_err(ExperimentError::io(out_dir))?;
    let mut artifacts = Vec::new();

    let metrics_path = out_dir.join(METRICS_FILE);
    fs::write(&metrics_path, metrics_csv(&records, config.emit_occupations))
        .map_err(ExperimentError::io(&metrics_path))?;
    artifacts.push(METRICS_FILE.to_string());

    let graph_path = out_dir.join(GRAPH_FILE);
    fs::write(&graph_path, graph.canonical_json() + "\n").map_err(ExperimentError::io(&graph_path))?;
    artifacts.push(GRAPH_FILE.to_string());

    let fit_report = fit.as_ref().map(|(f, window)| FitReport::new(f, *window));
    if let Some(report) = &fit_report {
        let path = out_dir.join(FIT_FILE);
        fs::write(&path, to_json_pretty(report)).map_err(ExperimentError::io(&path))?;
        artifacts.push(FIT_FILE.to_string());
    }

    if opts.snapshots {
        let dir = out_dir.join(SNAPSHOT_DIR);
        fs::create_dir_all(&dir).map_err(ExperimentError::io(&dir))?;
        for (i, rho) in trajectory.states.iter().enumerate() {
            let name = format!("{SNAPSHOT_DIR}/state_{i:05}.json");
            let path = out_dir.join(&name);
            let text = serde_json::to_string(&rho.to_snapshot()).expect("snapshot serializes");
            fs::write(&path, text).map_err(ExperimentError::io(&path))?;
            artifacts.push(name);
        }
    }
    drop(trajectory);

    artifacts.push(MANIFEST_FILE.to_string());
    let manifest = RunManifest {
        config: config.clone(),
        initial_node: initial,
        graph_hash: graph.canonical_hash(),
        graph_seed: sub_seed(config.seed, SEED_STAGE_GRAPH),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        artifacts,
        engine_version: ENGINE_VERSION.to_string(),
        fit: fit_report,
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, to_json_pretty(&manifest)).map_err(ExperimentError::io(&manifest_path))?;

    Ok(RunOutcome {
        manifest,
        graph,
        records,
        fit: fit.map(|(f, _)| f),
    })
}

fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Metrics CSV text. Numbers use Rust's shortest round-trip formatting.
pub fn metrics_csv(records: &[MetricRecord], emit_occupations: bool) -> String {
    let mut out = String::from("t,l1_coherence,fidelity,entropy,d_qc");
    if emit_occupations {
        if let Some(first) = records.first() {
            for k in 0..first.occupations.len() {
                write!(out, ",p_{k}").unwrap();
            }
        }
    }
    out.push('\n');
    for r in records {
        write!(
            out,
            "{},{},{},{},{}",
            r.t, r.l1_coherence, r.fidelity_with_initial, r.entropy, r.d_qc
        )
        .unwrap();
        if emit_occupations {
            for p in &r.occupations {
                write!(out, ",{p}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// Pulls a named column out of metric records.
pub fn record_column(records: &[MetricRecord], column: &str) -> Option<Vec<f64>> {
    let pick: fn(&MetricRecord) -> f64 = match column {
        "t" => |r| r.t,
        "l1_coherence" => |r| r.l1_coherence,
        "fidelity" => |r| r.fidelity_with_initial,
        "entropy" => |r| r.entropy,
        "d_qc" => |r| r.d_qc,
        other => {
            let k: usize = other.strip_prefix("p_")?.parse().ok()?;
            if records.first().is_some_and(|r| k >= r.occupations.len()) {
                return None;
            }
            return Some(records.iter().map(|r| r.occupations[k]).collect());
        }
    };
    Some(records.iter().map(pick).collect())
}

/// Fits `values(times)` inside `window` and returns the fit with the time
/// span actually used. With `from_peak`, samples before the largest value in
/// the window are dropped, so a rise from zero does not enter a decay fit.
pub fn fit_series(
    times: &[f64],
    values: &[f64],
    window: Option<[f64; 2]>,
    from_peak: bool,
) -> crate::error::Result<(FitResult, [f64; 2])> {
    let [a, b] = window.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let (mut t, mut v) = fit_window(times, values, a, b)?;
    if from_peak {
        let peak = v
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map_or(0, |(i, _)| i);
        t.drain(..peak);
        v.drain(..peak);
    }
    let used = [t[0], *t.last().expect("non-empty window")];
    let fit = fit_stretched_exponential(&t, &v, &FitOptions::default())?;
    Ok((fit, used))
}

fn fit_records(records: &[MetricRecord], spec: &FitSpec) -> crate::error::Result<(FitResult, [f64; 2])> {
    let values = record_column(records, &spec.column).ok_or_else(|| {
        Error::InvalidFitInput(format!("unknown metrics column {:?}", spec.column))
    })?;
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    fit_series(&times, &values, spec.window, spec.from_peak)
}

/// Reads `t` and `column` from a metrics CSV.
pub fn read_metrics_column(path: &Path, column: &str) -> ExperimentResult<(Vec<f64>, Vec<f64>)> {
    let bad = |reason: String| ExperimentError::Input {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => bad(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| bad(format!("missing column {name:?}")))
    };
    let t_idx = find("t")?;
    let v_idx = find(column)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let parse = |idx: usize| -> ExperimentResult<f64> {
            let field = row.get(idx).ok_or_else(|| bad(format!("row {} is short", line + 2)))?;
            field
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: {field:?} is not a number", line + 2)))
        };
        times.push(parse(t_idx)?);
        values.push(parse(v_idx)?);
    }
    Ok((times, values))
}

/// Fits one column of a metrics CSV.
pub fn fit_metrics_file(
    path: &Path,
    column: &str,
    window: Option<[f64; 2]>,
    from_peak: bool,
) -> ExperimentResult<(FitResult, FitReport)> {
    let (times, values) = read_metrics_column(path, column)?;
    let (fit, used) =
        fit_series(&times, &values, window, from_peak).map_err(ExperimentError::at(Stage::Fit))?;
    let report = FitReport::new(&fit, used);
    Ok((fit, report))
}

/// Per-run line of a sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub index: usize,
    pub label: String,
    pub topology: String,
    pub n: usize,
    pub model: String,
    pub initial_node: Option<usize>,
    pub fit: Option<FitReport>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub outcomes: Vec<ExperimentResult<RunOutcome>>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_err()).count()
    }

    pub fn manifests(&self) -> Vec<&RunManifest> {
        self.outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok().map(|o| &o.manifest))
            .collect()
    }

    pub fn into_result(self) -> ExperimentResult<Self> {
        let failed = self.failures();
        if failed > 0 {
            return Err(ExperimentError::PartialSweep {
                failed,
                total: self.outcomes.len(),
            });
        }
        Ok(self)
    }
}

pub fn run_directory(out_dir: &Path, index: usize, config: &ExperimentConfig) -> PathBuf {
    out_dir.join(format!("{index:03}_{}", config.label()))
}

/// Runs every config on `jobs` worker threads. Each run owns its directory,
/// so artifacts do not depend on `jobs`. Failures are recorded per run and
/// the sweep carries on.
pub fn sweep(
    configs: &[ExperimentConfig],
    out_dir: &Path,
    jobs: usize,
    opts: RunOptions,
) -> ExperimentResult<SweepReport> {
    fs::create_dir_all(out_dir).map_err(ExperimentError::io(out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let outcomes: Vec<ExperimentResult<RunOutcome>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                let result = run(cfg, &run_directory(out_dir, i, cfg), opts);
                if let Err(e) = &result {
                    log::warn!("run {i} ({}) failed: {e}", cfg.label());
                }
                result
            })
            .collect()
    });
    let summary: Vec<SummaryRow> = configs
        .iter()
        .zip(&outcomes)
        .enumerate()
        .map(|(index, (cfg, outcome))| SummaryRow {
            index,
            label: cfg.label(),
            topology: cfg.topology.family().to_string(),
            n: cfg.topology.n(),
            model: cfg.model.label().to_string(),
            initial_node: outcome.as_ref().ok().map(|o| o.manifest.initial_node),
            fit: outcome.as_ref().ok().and_then(|o| o.manifest.fit.clone()),
            error: outcome.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let path = out_dir.join(SUMMARY_FILE);
    fs::write(&path, summary_csv(&summary)).map_err(ExperimentError::io(&path))?;
    Ok(SweepReport { outcomes, summary })
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("index,label,topology,n,model,initial_node,C0,lambda,beta,rss,converged,error\n");
    for r in rows {
        let node = r.initial_node.map(|n| n.to_string()).unwrap_or_default();
        let fit = match &r.fit {
            Some(f) => format!("{},{},{},{},{}", f.c0, f.lambda, f.beta, f.rss, f.converged),
            None => ",,,,".to_string(),
        };
        let error = r
            .error
            .as_deref()
            .map(|e| format!("\"{}\"", e.replace('"', "'")))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.index, r.label, r.topology, r.n, r.model, node, fit, error
        )
        .unwrap();
    }
    out
}
