use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctqw_core::experiment::config::{sub_seed, SEED_STAGE_GRAPH};
use ctqw_core::experiment::presets::{preset, PRESET_NAMES};
use ctqw_core::experiment::{
    fit_metrics_file, run, seed_override, sweep, ExperimentConfig, ExperimentError, RunOptions,
    TopologySpec,
};

const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "ctqw", version, about = "Quantum walks on graphs under decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write it as canonical JSON.
    GenerateGraph(GenerateArgs),
    /// Run one experiment config.
    Run(RunArgs),
    /// Run a preset or a list of configs in parallel.
    Sweep(SweepArgs),
    /// Fit a stretched exponential to one column of a metrics CSV.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cycle,
    Complete,
    Star,
    Er,
    Ws,
    Ba,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Top-level seed; the graph uses the same sub-seed as `run`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    p_rewire: f64,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    emit_occupations: bool,
    #[arg(long)]
    snapshots: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "configs", required_unless_present = "configs")]
    preset: Option<String>,
    /// JSON array of configs.
    #[arg(long)]
    configs: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    snapshots: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "l1_coherence")]
    column: String,
    /// `t_min,t_max`
    #[arg(long, value_parser = parse_window)]
    window: Option<[f64; 2]>,
    /// Drop samples before the largest value in the window.
    #[arg(long)]
    from_peak: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("{a:?} is not a number"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("{b:?} is not a number"))?;
    if !(a < b) {
        return Err(format!("window [{a}, {b}] is empty"));
    }
    Ok([a, b])
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenerateGraph(args) => generate_graph(args),
        Command::Run(args) => run_one(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Fit(args) => fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    seed_override().map_err(Failure::config)
}

fn write_json(path: &Path, text: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn generate_graph(args: GenerateArgs) -> CliResult {
    let n = args.n;
    let topology = match args.family {
        Family::Cycle => TopologySpec::Cycle { n },
        Family::Complete => TopologySpec::Complete { n },
        Family::Star => TopologySpec::Star { n },
        Family::Er => TopologySpec::ErdosRenyi { n, avg_degree: args.avg_degree },
        Family::Ws => TopologySpec::WattsStrogatz { n, k: args.k, p_rewire: args.p_rewire },
        Family::Ba => TopologySpec::BarabasiAlbert { n, m: args.m },
    };
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let graph = topology
        .build(sub_seed(seed, SEED_STAGE_GRAPH))
        .map_err(|e| Failure::from(ExperimentError::Model {
            stage: ctqw_core::experiment::Stage::Graph,
            source: e,
        }))?;
    write_json(&args.out, &(graph.canonical_json() + "\n"))?;
    println!("{} nodes, {} edges, sha256 {}", graph.n(), graph.edge_count(), graph.canonical_hash());
    Ok(())
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn run_one(args: RunArgs) -> CliResult {
    let mut config = read_config(&args.config)?;
    if let Some(seed) = env_seed()? {
        config.seed = seed;
    }
    config.emit_occupations |= args.emit_occupations;
    let outcome = run(&config, &args.out_dir, RunOptions { snapshots: args.snapshots })?;
    println!(
        "{}: initial node {}, {} samples, {:.3}s",
        config.label(),
        outcome.manifest.initial_node,
        outcome.records.len(),
        outcome.manifest.wall_clock_seconds
    );
    if let Some(f) = &outcome.fit {
        println!("fit: C0={} lambda={} beta={} converged={}", f.c0, f.lambda, f.beta, f.converged);
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> CliResult {
    let mut configs = match (&args.preset, &args.configs) {
        (Some(name), _) => preset(name).map_err(|e| Failure::config(e.to_string()))?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Vec<ExperimentConfig>>(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
        (None, None) => {
            return Err(Failure::config(format!(
                "give --preset ({}) or --configs",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    if let Some(seed) = env_seed()? {
        for c in &mut configs {
            c.seed = seed;
        }
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = sweep(&configs, &args.out_dir, jobs, RunOptions { snapshots: args.snapshots })?;
    for row in &report.summary {
        match (&row.fit, &row.error) {
            (_, Some(e)) => println!("{:>3} {:<32} FAILED {e}", row.index, row.label),
            (Some(f), None) => println!(
                "{:>3} {:<32} lambda={:.4} beta={:.4}{}",
                row.index,
                row.label,
                f.lambda,
                f.beta,
                if f.converged { "" } else { " (not converged)" }
            ),
            (None, None) => println!("{:>3} {:<32} ok", row.index, row.label),
        }
    }
    report.into_result()?;
    Ok(())
}

fn fit(args: FitArgs) -> CliResult {
    let (result, report) = fit_metrics_file(&args.input, &args.column, args.window, args.from_peak)?;
    if !result.converged {
        log::warn!(
            "fit did not converge: {}",
            result.diagnostic.as_deref().unwrap_or("no diagnostic")
        );
    }
    let text = serde_json::to_string_pretty(&report).expect("fit report serializes") + "\n";
    match &args.out {
        Some(path) => write_json(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
