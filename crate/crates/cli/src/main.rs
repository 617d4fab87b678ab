//! `faultsense`: generate synthetic recordings, train any of the eight models,
//! evaluate run directories and tabulate results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use faultsense_core::experiment::{
    comparison_table, evaluate_checkpoint, load_run, load_run_summary, read_config_file, run_experiment,
    write_artifacts, ConfigLayer, DataSource, ExperimentConfig, CONFIG_FILE,
};
use faultsense_core::signal::{generate_synthetic_dataset, write_dataset, SyntheticSpec};
use faultsense_core::Error;

#[derive(Parser, Debug)]
#[command(name = "faultsense", version, about = "Bearing fault diagnosis experiments")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset (`.f32` files plus manifest.csv).
    Generate(GenerateArgs),
    /// Train one model and write a run directory.
    Train(TrainArgs),
    /// Score a trained run on its test split.
    Evaluate(EvaluateArgs),
    /// Compare run directories in one table.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    n_per_class: usize,
    #[arg(long = "len", default_value_t = 10_000)]
    signal_len: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Burst amplitudes for healthy, developing fault and faulty.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.5, 2.0])]
    amp: Vec<f64>,
}

/// Overrides shared by `train` and `evaluate`; each maps to a config key.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long = "model", value_name = "1-8")]
    model_id: Option<String>,
    /// Manifest path or `synthetic:n=..,len=..,seed=..,noise=..,amp=h/d/f`.
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    feature_mode: Option<String>,
    #[arg(long)]
    window_len: Option<String>,
    #[arg(long)]
    overlap: Option<String>,
    #[arg(long)]
    segment_len: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    timesteps: Option<String>,
    #[arg(long)]
    epsilon_min: Option<String>,
    #[arg(long)]
    buffer_capacity: Option<String>,
    #[arg(long)]
    target_sync_interval: Option<String>,
    /// `default`, `table6` or a 3-line CSV path.
    #[arg(long)]
    reward_matrix: Option<String>,
}

impl Overrides {
    fn layer(&self) -> ConfigLayer {
        let pairs = [
            ("model_id", &self.model_id),
            ("data", &self.data),
            ("feature_mode", &self.feature_mode),
            ("window_len", &self.window_len),
            ("overlap", &self.overlap),
            ("segment_len", &self.segment_len),
            ("epochs", &self.epochs),
            ("timesteps", &self.timesteps),
            ("epsilon_min", &self.epsilon_min),
            ("buffer_capacity", &self.buffer_capacity),
            ("target_sync_interval", &self.target_sync_interval),
            ("reward_matrix", &self.reward_matrix),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Run directory written by `train`.
    #[arg(long, value_name = "DIR")]
    run: PathBuf,
    /// Checkpoint to score instead of the run's own.
    #[arg(long, value_name = "PATH")]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(required = true, value_name = "RUN_DIR")]
    runs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .chain()
                .any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_usage));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Train(args) => train(cli, args),
        Command::Evaluate(args) => evaluate(cli, args),
        Command::Report(args) => report(cli, args),
    }
}

fn generate(cli: &Cli, args: &GenerateArgs) -> anyhow::Result<()> {
    let out = cli
        .out
        .as_ref()
        .ok_or_else(|| Error::Config("generate needs --out <dir>".into()))?;
    let [h, d, f] = args.amp[..] else {
        return Err(Error::Config("--amp needs three values".into()).into());
    };
    let spec = SyntheticSpec::new(
        args.n_per_class,
        args.signal_len,
        cli.seed.unwrap_or(0),
        args.noise,
        (h, d, f),
    );
    let signals = generate_synthetic_dataset(&spec).context("signal")?;
    let manifest = write_dataset(out, &signals).context("signal")?;
    if !cli.quiet {
        println!("wrote {} recordings, manifest {}", signals.len(), manifest.display());
    }
    Ok(())
}

/// Command-line layer: subcommand overrides plus the global flags.
fn cli_layer(cli: &Cli, overrides: &Overrides) -> ConfigLayer {
    let mut layer = overrides.layer();
    if let Some(seed) = cli.seed {
        layer.insert("seed".into(), seed.to_string());
    }
    if let Some(out) = &cli.out {
        layer.insert("out_dir".into(), out.display().to_string());
    }
    layer
}

/// Manifest paths are stored absolute so a run directory can be evaluated
/// from anywhere.
fn absolute_data(cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
    if let Some(DataSource::Manifest(p)) = &cfg.data {
        let abs = std::fs::canonicalize(p)
            .map_err(|_| Error::MissingFile(p.clone()))
            .context("signal")?;
        cfg.data = Some(DataSource::Manifest(abs));
    }
    Ok(())
}

fn train(cli: &Cli, args: &TrainArgs) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => ConfigLayer::new(),
    };
    let mut cfg = ExperimentConfig::from_layers(&[&file, &cli_layer(cli, &args.overrides)])?;
    let data = cfg
        .data
        .clone()
        .ok_or_else(|| Error::Config("no data source: pass --data or set `data` in the config".into()))?;
    let out_dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `out_dir`".into()))?;
    absolute_data(&mut cfg)?;
    let signals = data.load().context("signal")?;
    let out = run_experiment(&cfg, &signals).with_context(|| format!("train model {}", cfg.model.id))?;
    let artifacts = write_artifacts(&out, &out_dir).context("eval")?;
    if !cli.quiet {
        println!(
            "model {}  accuracy {:.4}  macro-F1 {:.4}  time {:.1} s  -> {}",
            cfg.model.id,
            out.report.accuracy,
            out.report.macro_avg.f1,
            out.train_seconds,
            artifacts.dir.display()
        );
    }
    Ok(())
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> anyhow::Result<()> {
    let (_, mut net, normalizer) = load_run(&args.run).with_context(|| format!("{}", args.run.display()))?;
    if let Some(p) = &args.checkpoint {
        net = faultsense_core::nn::read_checkpoint(p)?;
    }
    let mut layers = vec![read_config_file(&args.run.join(CONFIG_FILE))?];
    let mut overrides = args.overrides.layer();
    if let Some(seed) = cli.seed {
        overrides.insert("seed".into(), seed.to_string());
    }
    // A model override may switch feature mode; drop the stored one.
    if overrides.contains_key("model_id") {
        layers[0].remove("feature_mode");
    }
    layers.push(overrides);
    let refs: Vec<&ConfigLayer> = layers.iter().collect();
    let cfg = ExperimentConfig::from_layers(&refs)?;
    let data = cfg
        .data
        .clone()
        .ok_or_else(|| Error::Config("no data source recorded in the run; pass --data".into()))?;
    let signals = data.load().context("signal")?;
    let report = evaluate_checkpoint(&cfg, &net, &normalizer, &signals).context("eval")?;
    let json = report.to_json();
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("report.json");
            std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
            if !cli.quiet {
                println!(
                    "model {}  accuracy {:.4}  macro-F1 {:.4}  -> {}",
                    report.model_id,
                    report.accuracy,
                    report.macro_avg.f1,
                    path.display()
                );
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn report(cli: &Cli, args: &ReportArgs) -> anyhow::Result<()> {
    let runs = args
        .runs
        .iter()
        .map(|d| load_run_summary(d))
        .collect::<Result<Vec<_>, _>>()
        .context("eval")?;
    let (text, csv) = comparison_table(&runs);
    if let Some(dir) = &cli.out {
        write_table(dir, &text, &csv)?;
    }
    if !cli.quiet {
        print!("{text}");
    }
    Ok(())
}

fn write_table(dir: &Path, text: &str, csv: &str) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in [("comparison.txt", text), ("comparison.csv", csv)] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| anyhow!("writing {}: {e}", path.display()))?;
    }
    Ok(())
}
