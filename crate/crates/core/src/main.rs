use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Deserialize;

use mpggm::fit::{fit, FitOptions};
use mpggm::io::{
    load_dataset, read_results, read_truth, write_results, write_truth, Labels, RunMetadata,
};
use mpggm::report::{
    aggregate_replicates, evaluate_replicate, format_accuracy_table, format_graph_report,
    graph_report,
};
use mpggm::sampler::Hyperparameters;
use mpggm::simulation::{build_scenario, SimulationScenario};
use mpggm::{Error, Result};

#[derive(Parser)]
#[command(name = "mpggm", version, about = "Joint graphical models across groups and platforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground-truth networks and data from a scenario file.
    Simulate(SimulateArgs),
    /// Run the sampler on a dataset and write posterior summaries.
    Fit(FitArgs),
    /// Compare fitted summaries with simulated truth.
    Evaluate(EvaluateArgs),
    /// Report graph statistics of a fitted summary.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// JSON run configuration; its fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Simulate from a scenario instead of reading a manifest.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Sweeps kept after burn-in.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    thinning: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Fully sequential execution.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    mpp_threshold: Option<f64>,
    /// Log progress every this many sweeps.
    #[arg(long, default_value_t = 1000)]
    progress_every: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Summary directories, one per replicate.
    #[arg(long = "summary", required = true, num_args = 1..)]
    summaries: Vec<PathBuf>,
    /// Truth directories, in the same order as the summaries.
    #[arg(long = "truth", required = true, num_args = 1..)]
    truths: Vec<PathBuf>,
    #[arg(long)]
    mpp_threshold: Option<f64>,
    /// Also write the report as JSON here.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    summary: PathBuf,
    #[arg(long, default_value_t = 4)]
    hub_degree: usize,
    #[arg(long)]
    mpp_threshold: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

/// Run configuration file. Every field is optional and wins over the flag
/// of the same name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    manifest: Option<PathBuf>,
    scenario: Option<PathBuf>,
    hyperparameters: Option<Hyperparameters>,
    iterations: Option<usize>,
    burnin: Option<usize>,
    chains: Option<usize>,
    thinning: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    strict: Option<bool>,
    output_dir: Option<PathBuf>,
    mpp_threshold: Option<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_scenario(path: &Path) -> Result<SimulationScenario> {
    let scenario: SimulationScenario = read_json(path)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Relative paths in a config file are taken relative to the file.
fn relative_to(config: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut scenario = read_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let truth = build_scenario(&scenario)?;
    let manifest = write_truth(&truth, &scenario, &args.output_dir)?;
    info!("wrote ground truth and data; manifest at {}", manifest.display());
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let config: RunConfig = match &args.config {
        Some(path) => {
            let mut c: RunConfig = read_json(path)?;
            c.manifest = c.manifest.map(|p| relative_to(path, p));
            c.scenario = c.scenario.map(|p| relative_to(path, p));
            c.output_dir = c.output_dir.map(|p| relative_to(path, p));
            c
        }
        None => RunConfig::default(),
    };
    let defaults = FitOptions::default();
    let options = FitOptions {
        hyperparameters: config.hyperparameters.unwrap_or_default(),
        iterations: config.iterations.or(args.iterations).unwrap_or(defaults.iterations),
        burnin: config.burnin.or(args.burnin).unwrap_or(defaults.burnin),
        chains: config.chains.or(args.chains).unwrap_or(defaults.chains),
        thinning: config.thinning.or(args.thinning).unwrap_or(defaults.thinning),
        seed: config.seed.or(args.seed).unwrap_or(defaults.seed),
        threads: config.threads.or(args.threads).unwrap_or(defaults.threads),
        strict: config.strict.unwrap_or(args.strict),
        mpp_threshold: config
            .mpp_threshold
            .or(args.mpp_threshold)
            .unwrap_or(defaults.mpp_threshold),
        progress_every: args.progress_every,
        ..defaults
    };
    options.validate()?;
    let output_dir = config
        .output_dir
        .or(args.output_dir)
        .ok_or_else(|| Error::Config("an output directory is required".into()))?;

    let data = match (config.manifest.or(args.manifest), config.scenario.or(args.scenario)) {
        (Some(manifest), None) => load_dataset(&manifest)?,
        (None, Some(scenario)) => build_scenario(&read_scenario(&scenario)?)?.dataset()?,
        _ => {
            return Err(Error::Config(
                "give exactly one of a manifest or a scenario".into(),
            ))
        }
    };
    for (s, platform) in data.platforms.iter().enumerate() {
        let sizes: Vec<usize> = platform.groups.iter().map(|g| g.n).collect();
        info!(
            "platform '{}': p = {}, n per group = {sizes:?}",
            platform.name,
            data.p(s)
        );
    }

    let result = fit(&data, &options)?;
    if let Some(r) = result.agreement {
        info!("between-chain MPP correlation: {r:.4}");
    }
    let labels = Labels::from_dataset(&data);
    let run = RunMetadata::from_fit(&options, &result);
    let index = write_results(&result.summary, &labels, &run, &output_dir)?;
    info!("wrote {}", index.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    if args.summaries.len() != args.truths.len() {
        return Err(Error::Config(format!(
            "{} summary directories but {} truth directories",
            args.summaries.len(),
            args.truths.len()
        )));
    }
    let mut reps = Vec::new();
    let mut labels = None;
    for (sdir, tdir) in args.summaries.iter().zip(&args.truths) {
        let mut loaded = read_results(sdir)?;
        if let Some(t) = args.mpp_threshold {
            loaded.summary.reselect(t)?;
        }
        let (_, truth) = read_truth(tdir)?;
        reps.push(evaluate_replicate(&loaded.summary, &truth)?);
        labels.get_or_insert(loaded.labels);
    }
    let report = aggregate_replicates(reps)?;
    let labels = labels.expect("at least one replicate");
    print!("{}", format_accuracy_table(&report, &labels));
    if let Some(dir) = args.output_dir {
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        write_text(&dir.join("evaluation.json"), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let mut loaded = read_results(&args.summary)?;
    if let Some(t) = args.mpp_threshold {
        loaded.summary.reselect(t)?;
    }
    let report = graph_report(&loaded.summary.selected, args.hub_degree)?;
    print!("{}", format_graph_report(&report, &loaded.labels));
    if let Some(dir) = args.output_dir {
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        write_text(&dir.join("graph_report.json"), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Summarize(a) => cmd_summarize(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Sampler { dump, .. } = &e {
                eprintln!("state at failure:\n{dump}");
            }
            warn!("exiting with code {}", e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
