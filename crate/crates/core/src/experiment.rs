//! End-to-end runs of the eight model configurations: split recordings,
//! preprocess, train, evaluate, and write a self-describing run directory.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::{build_report, MetricsReport, RewardCurve};
use crate::features::{
    build_feature_dataset, features_to_dataset, make_windows, windows_to_dataset, Normalizer, WindowingSpec,
    DEFAULT_SEGMENT_LEN,
};
use crate::nn::{read_checkpoint, write_checkpoint, HyperParams, Mlp};
use crate::rl::{dqn_train_epoch, dqn_train_timestep, DqnConfig, RewardMatrix, DEFAULT_CAPACITY};
use crate::signal::{
    generate_synthetic_dataset, load_dataset, split_train_test, DatasetManifest, LabeledSignal, SplitSpec,
    SyntheticSpec,
};
use crate::supervised::{evaluate_model, train_ann, LossKind, TrainConfig};

/// Timestep budget for Models 4 and 8 when none is configured.
pub const DEFAULT_RUN_TIMESTEPS: usize = 10_000;

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const REPORT_FILE: &str = "report.json";
pub const REWARD_CURVE_FILE: &str = "reward_curve.csv";
pub const LOSS_LOG_FILE: &str = "loss_log.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const NORMALIZER_FILE: &str = "normalizer.json";
pub const CONFIG_FILE: &str = "run.conf";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Raw overlapping windows.
    Windows,
    /// Statistical feature vectors of fixed-length segments.
    Stats,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Windows => "windows",
            FeatureMode::Stats => "stats",
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "windows" => Ok(FeatureMode::Windows),
            "stats" => Ok(FeatureMode::Stats),
            other => Err(Error::Config(format!(
                "feature_mode must be windows or stats, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trainer {
    CrossEntropy,
    ExpectedReward,
    DqnEpoch,
    DqnTimestep,
}

/// Input representation and training method of one of the eight models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub id: u8,
    pub feature_mode: FeatureMode,
    pub trainer: Trainer,
}

impl ModelSpec {
    pub fn from_id(id: u8) -> Result<Self> {
        if !(1..=8).contains(&id) {
            return Err(Error::Config(format!("model_id must be in 1-8, got {id}")));
        }
        let feature_mode = if id <= 4 {
            FeatureMode::Windows
        } else {
            FeatureMode::Stats
        };
        let trainer = match (id - 1) % 4 {
            0 => Trainer::CrossEntropy,
            1 => Trainer::ExpectedReward,
            2 => Trainer::DqnEpoch,
            _ => Trainer::DqnTimestep,
        };
        Ok(Self {
            id,
            feature_mode,
            trainer,
        })
    }

    pub fn uses_reward(&self) -> bool {
        self.trainer != Trainer::CrossEntropy
    }

    pub fn is_rl(&self) -> bool {
        matches!(self.trainer, Trainer::DqnEpoch | Trainer::DqnTimestep)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewardChoice {
    /// +1 on the diagonal, -1 elsewhere.
    Default,
    /// The shaped matrix with asymmetric penalties.
    Table6,
    Custom(PathBuf),
}

impl RewardChoice {
    pub fn load(&self) -> Result<RewardMatrix> {
        match self {
            RewardChoice::Default => Ok(RewardMatrix::preset()),
            RewardChoice::Table6 => Ok(RewardMatrix::shaped()),
            RewardChoice::Custom(path) => RewardMatrix::read_csv(path),
        }
    }
}

impl fmt::Display for RewardChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardChoice::Default => f.write_str("default"),
            RewardChoice::Table6 => f.write_str("table6"),
            RewardChoice::Custom(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for RewardChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "" => Err(Error::Config("reward_matrix must not be empty".into())),
            "default" => Ok(RewardChoice::Default),
            "table6" => Ok(RewardChoice::Table6),
            path => Ok(RewardChoice::Custom(PathBuf::from(path))),
        }
    }
}

/// Where recordings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Manifest(PathBuf),
    /// Written `synthetic:n=200,len=10000,seed=7,noise=0.1,amp=0/0.5/2`.
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Vec<LabeledSignal>> {
        match self {
            DataSource::Manifest(path) => load_dataset(&DatasetManifest::read(path)?),
            DataSource::Synthetic(spec) => generate_synthetic_dataset(spec),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Manifest(p) => write!(f, "{}", p.display()),
            DataSource::Synthetic(s) => {
                let (h, d, a) = s.impulse_amp;
                write!(
                    f,
                    "synthetic:n={},len={},seed={},noise={},amp={h}/{d}/{a}",
                    s.n_per_class, s.signal_len, s.seed, s.noise_sigma
                )
            }
        }
    }
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(params) = s.strip_prefix("synthetic:") else {
            if s.is_empty() {
                return Err(Error::Config("data must not be empty".into()));
            }
            return Ok(DataSource::Manifest(PathBuf::from(s)));
        };
        let mut spec = SyntheticSpec::new(200, 10_000, 0, 0.1, (0.0, 0.5, 2.0));
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("synthetic data parameter {kv:?} is not key=value")))?;
            match k {
                "n" => spec.n_per_class = parse_value("data.n", v)?,
                "len" => spec.signal_len = parse_value("data.len", v)?,
                "seed" => spec.seed = parse_value("data.seed", v)?,
                "noise" => spec.noise_sigma = parse_value("data.noise", v)?,
                "amp" => {
                    let amps: Vec<f64> = v
                        .split('/')
                        .map(|a| parse_value("data.amp", a))
                        .collect::<Result<_>>()?;
                    let [h, d, f] = amps[..] else {
                        return Err(Error::Config(format!("data.amp needs three values h/d/f, got {v:?}")));
                    };
                    spec.impulse_amp = (h, d, f);
                }
                other => return Err(Error::Config(format!("unknown synthetic data parameter {other:?}"))),
            }
        }
        Ok(DataSource::Synthetic(spec))
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

/// Recognized configuration keys, in canonical order.
pub const CONFIG_KEYS: [&str; 14] = [
    "model_id",
    "feature_mode",
    "data",
    "window_len",
    "overlap",
    "segment_len",
    "epochs",
    "timesteps",
    "epsilon_min",
    "buffer_capacity",
    "target_sync_interval",
    "reward_matrix",
    "seed",
    "out_dir",
];

/// Key/value pairs from one configuration layer (file or command line).
pub type ConfigLayer = BTreeMap<String, String>;

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped;
/// unknown or repeated keys are errors.
pub fn parse_config_text(text: &str) -> Result<ConfigLayer> {
    let mut out = ConfigLayer::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key {k:?}", n + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k:?}", n + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<ConfigLayer> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub data: Option<DataSource>,
    pub window_len: usize,
    pub overlap: f64,
    pub segment_len: usize,
    pub epochs: usize,
    pub timesteps: usize,
    pub epsilon_min: f64,
    pub buffer_capacity: usize,
    pub target_sync_interval: Option<usize>,
    /// `None` picks the model's default matrix.
    pub reward_matrix: Option<RewardChoice>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(model_id: u8) -> Result<Self> {
        let hp = HyperParams::default();
        Ok(Self {
            model: ModelSpec::from_id(model_id)?,
            data: None,
            window_len: 1000,
            overlap: 0.5,
            segment_len: DEFAULT_SEGMENT_LEN,
            epochs: hp.epochs,
            timesteps: DEFAULT_RUN_TIMESTEPS,
            epsilon_min: hp.epsilon_min,
            buffer_capacity: DEFAULT_CAPACITY,
            target_sync_interval: None,
            reward_matrix: None,
            seed: 0,
            out_dir: None,
        })
    }

    /// Builds a config from layers applied in order, so later layers win.
    /// `model_id` must appear in at least one layer.
    pub fn from_layers(layers: &[&ConfigLayer]) -> Result<Self> {
        let mut merged = ConfigLayer::new();
        for layer in layers {
            for (k, v) in layer.iter() {
                merged.insert(k.clone(), v.clone());
            }
        }
        let id = merged
            .get("model_id")
            .ok_or_else(|| Error::Config("model_id is required (1-8)".into()))?;
        let mut cfg = Self::new(parse_value("model_id", id)?)?;
        for (k, v) in &merged {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model_id" => {
                self.model = ModelSpec::from_id(parse_value(key, value)?)?;
            }
            "feature_mode" => {
                let mode: FeatureMode = value.parse()?;
                if mode != self.model.feature_mode {
                    return Err(Error::Config(format!(
                        "model {} uses feature_mode {}, not {}",
                        self.model.id,
                        self.model.feature_mode.as_str(),
                        mode.as_str()
                    )));
                }
            }
            "data" => self.data = Some(value.parse()?),
            "window_len" => self.window_len = parse_value(key, value)?,
            "overlap" => self.overlap = parse_value(key, value)?,
            "segment_len" => self.segment_len = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "timesteps" => self.timesteps = parse_value(key, value)?,
            "epsilon_min" => self.epsilon_min = parse_value(key, value)?,
            "buffer_capacity" => self.buffer_capacity = parse_value(key, value)?,
            "target_sync_interval" => {
                self.target_sync_interval = match value {
                    "" | "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "reward_matrix" => self.reward_matrix = Some(value.parse()?),
            "seed" => self.seed = parse_value(key, value)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.windowing().map_err(|e| Error::Config(e.to_string()))?;
        if self.segment_len < 2 {
            return bad(format!("segment_len must be at least 2, got {}", self.segment_len));
        }
        if self.timesteps == 0 {
            return bad("timesteps must be at least 1".into());
        }
        if self.buffer_capacity == 0 {
            return bad("buffer_capacity must be at least 1".into());
        }
        if self.target_sync_interval == Some(0) {
            return bad("target_sync_interval must be at least 1".into());
        }
        self.hyper_params().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn windowing(&self) -> Result<WindowingSpec> {
        WindowingSpec::new(self.window_len, self.overlap)
    }

    pub fn hyper_params(&self) -> HyperParams {
        HyperParams {
            epochs: self.epochs,
            epsilon_min: self.epsilon_min,
            ..HyperParams::default()
        }
    }

    /// The matrix used by reward-driven models: Model 8 defaults to the shaped
    /// matrix, the others to +1/-1. Cross-entropy models get `None`.
    pub fn resolved_reward_matrix(&self) -> Result<Option<RewardMatrix>> {
        if !self.model.uses_reward() {
            return Ok(None);
        }
        let choice = self.reward_matrix.clone().unwrap_or(if self.model.id == 8 {
            RewardChoice::Table6
        } else {
            RewardChoice::Default
        });
        choice.load().map(Some)
    }

    /// Every key in canonical order; parses back to an equal config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let value = match key {
                "model_id" => self.model.id.to_string(),
                "feature_mode" => self.model.feature_mode.as_str().to_string(),
                "data" => match &self.data {
                    Some(d) => d.to_string(),
                    None => continue,
                },
                "window_len" => self.window_len.to_string(),
                "overlap" => self.overlap.to_string(),
                "segment_len" => self.segment_len.to_string(),
                "epochs" => self.epochs.to_string(),
                "timesteps" => self.timesteps.to_string(),
                "epsilon_min" => self.epsilon_min.to_string(),
                "buffer_capacity" => self.buffer_capacity.to_string(),
                "target_sync_interval" => self.target_sync_interval.map_or("none".into(), |n| n.to_string()),
                "reward_matrix" => match &self.reward_matrix {
                    Some(r) => r.to_string(),
                    None => continue,
                },
                "seed" => self.seed.to_string(),
                "out_dir" => match &self.out_dir {
                    Some(p) => p.display().to_string(),
                    None => continue,
                },
                _ => unreachable!(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// SHA-256 of the canonical text minus `out_dir`, so the same experiment
    /// written to different directories has the same digest.
    pub fn digest(&self) -> String {
        let text = Self {
            out_dir: None,
            ..self.clone()
        }
        .to_config_text();
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Normalized train and test sets.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub normalizer: Normalizer,
}

/// Seeded stratified 80/20 split of the recordings. Splitting before
/// windowing keeps windows of one recording on one side.
pub fn split_recordings(
    cfg: &ExperimentConfig,
    signals: &[LabeledSignal],
) -> Result<(Vec<LabeledSignal>, Vec<LabeledSignal>)> {
    split_train_test(signals, &SplitSpec::with_seed(cfg.seed))
}

/// Windows or statistical features of `signals`, unnormalized.
pub fn featurize(cfg: &ExperimentConfig, signals: &[LabeledSignal]) -> Result<Dataset> {
    match cfg.model.feature_mode {
        FeatureMode::Windows => {
            let spec = cfg.windowing()?;
            let mut windows = Vec::new();
            for s in signals {
                windows.extend(make_windows(s, &spec)?);
            }
            windows_to_dataset(&windows)
        }
        FeatureMode::Stats => features_to_dataset(&build_feature_dataset(signals, cfg.segment_len)?),
    }
}

pub fn prepare(cfg: &ExperimentConfig, signals: &[LabeledSignal]) -> Result<Prepared> {
    let (train_sig, test_sig) = split_recordings(cfg, signals)?;
    if test_sig.is_empty() {
        return Err(Error::InvalidParam("test split is empty".into()));
    }
    let train = featurize(cfg, &train_sig)?;
    let test = featurize(cfg, &test_sig)?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let normalizer = Normalizer::fit(&train)?;
    Ok(Prepared {
        train: normalizer.apply(&train)?,
        test: normalizer.apply(&test)?,
        normalizer,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub net: Mlp,
    pub normalizer: Normalizer,
    pub report: MetricsReport,
    pub reward_curve: Option<RewardCurve>,
    pub loss_log: Option<Vec<f64>>,
    pub train_seconds: f64,
}

/// Trains on already prepared data and scores the test set.
pub fn train_and_evaluate(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<RunOutput> {
    let hp = cfg.hyper_params();
    let matrix = cfg.resolved_reward_matrix()?;
    let dqn_cfg = || DqnConfig {
        hp,
        buffer_capacity: cfg.buffer_capacity,
        target_sync_interval: cfg.target_sync_interval,
        record_trace: false,
    };
    let started = Instant::now();
    let (net, reward_curve, loss_log) = match (cfg.model.trainer, matrix) {
        (Trainer::CrossEntropy, _) => {
            let tc = TrainConfig {
                hp,
                loss: LossKind::cross_entropy(),
            };
            let out = train_ann(&prepared.train, &tc, cfg.seed)?;
            (out.net, None, Some(out.epoch_losses))
        }
        (Trainer::ExpectedReward, Some(m)) => {
            let tc = TrainConfig {
                hp,
                loss: LossKind::ExpectedReward(m),
            };
            let out = train_ann(&prepared.train, &tc, cfg.seed)?;
            (out.net, None, Some(out.epoch_losses))
        }
        (Trainer::DqnEpoch, Some(m)) => {
            let out = dqn_train_epoch(&prepared.train, &dqn_cfg(), &m, cfg.seed)?;
            (out.net, Some(RewardCurve::from_episodes(&out.episodes)), None)
        }
        (Trainer::DqnTimestep, Some(m)) => {
            let out = dqn_train_timestep(&prepared.train, &dqn_cfg(), &m, cfg.timesteps, cfg.seed)?;
            (out.net, Some(RewardCurve::from_episodes(&out.episodes)), None)
        }
        (_, None) => unreachable!("reward-driven models always resolve a matrix"),
    };
    let train_seconds = started.elapsed().as_secs_f64();
    let predictions = evaluate_model(&net, &prepared.test)?;
    let report = build_report(
        cfg.model.id,
        cfg.seed,
        &cfg.digest(),
        &predictions,
        prepared.test.labels(),
        reward_curve.as_ref(),
    )?;
    Ok(RunOutput {
        config: cfg.clone(),
        net,
        normalizer: prepared.normalizer.clone(),
        report,
        reward_curve,
        loss_log,
        train_seconds,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, signals: &[LabeledSignal]) -> Result<RunOutput> {
    cfg.validate()?;
    train_and_evaluate(cfg, &prepare(cfg, signals)?)
}

/// Files written for a run. Optional entries are `None` when the model does
/// not produce them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub checkpoint: PathBuf,
    pub report: PathBuf,
    pub reward_curve: Option<PathBuf>,
    pub loss_log: Option<PathBuf>,
    pub confusion: PathBuf,
    pub normalizer: PathBuf,
    pub config: PathBuf,
    pub timing: PathBuf,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn loss_log_csv(losses: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (i, l) in losses.iter().enumerate() {
        let _ = writeln!(out, "{},{l}", i + 1);
    }
    out
}

pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<RunArtifacts> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = |name: &str| dir.join(name);
    let artifacts = RunArtifacts {
        dir: dir.to_path_buf(),
        checkpoint: path(CHECKPOINT_FILE),
        report: path(REPORT_FILE),
        reward_curve: out.reward_curve.as_ref().map(|_| path(REWARD_CURVE_FILE)),
        loss_log: out.loss_log.as_ref().map(|_| path(LOSS_LOG_FILE)),
        confusion: path(CONFUSION_FILE),
        normalizer: path(NORMALIZER_FILE),
        config: path(CONFIG_FILE),
        timing: path(TIMING_FILE),
    };
    write_checkpoint(&artifacts.checkpoint, &out.net)?;
    write_file(&artifacts.report, out.report.to_json().as_bytes())?;
    if let (Some(p), Some(curve)) = (&artifacts.reward_curve, &out.reward_curve) {
        write_file(p, curve.to_csv().as_bytes())?;
    }
    if let (Some(p), Some(losses)) = (&artifacts.loss_log, &out.loss_log) {
        write_file(p, loss_log_csv(losses).as_bytes())?;
    }
    write_file(&artifacts.confusion, out.report.confusion_matrix().to_csv().as_bytes())?;
    let normalizer = serde_json::to_string_pretty(&out.normalizer).map_err(|e| Error::Report(e.to_string()))?;
    write_file(&artifacts.normalizer, normalizer.as_bytes())?;
    write_file(&artifacts.config, out.config.to_config_text().as_bytes())?;
    write_file(
        &artifacts.timing,
        format!("{{\"train_seconds\": {:.3}}}\n", out.train_seconds).as_bytes(),
    )?;
    Ok(artifacts)
}

/// Loads the config, checkpoint and normalizer stored in a run directory.
pub fn load_run(dir: &Path) -> Result<(ExperimentConfig, Mlp, Normalizer)> {
    let cfg = ExperimentConfig::from_layers(&[&read_config_file(&dir.join(CONFIG_FILE))?])?;
    let net = read_checkpoint(&dir.join(CHECKPOINT_FILE))?;
    let norm_path = dir.join(NORMALIZER_FILE);
    let text = std::fs::read_to_string(&norm_path).map_err(|e| Error::io(&norm_path, e))?;
    let normalizer: Normalizer =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", norm_path.display())))?;
    Ok((cfg, net, normalizer))
}

/// Scores `net` on the test split that `cfg` produces from `signals`.
pub fn evaluate_checkpoint(
    cfg: &ExperimentConfig,
    net: &Mlp,
    normalizer: &Normalizer,
    signals: &[LabeledSignal],
) -> Result<MetricsReport> {
    let (_, test_sig) = split_recordings(cfg, signals)?;
    if test_sig.is_empty() {
        return Err(Error::InvalidParam("test split is empty".into()));
    }
    let test = featurize(cfg, &test_sig)?;
    if test.dim() != net.num_inputs() || normalizer.dim() != net.num_inputs() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint expects {} inputs but {} mode produces {}",
            net.num_inputs(),
            cfg.model.feature_mode.as_str(),
            test.dim()
        )));
    }
    let test = normalizer.apply(&test)?;
    let predictions = evaluate_model(net, &test)?;
    build_report(cfg.model.id, cfg.seed, &cfg.digest(), &predictions, test.labels(), None)
}

/// One row of a model comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub report: MetricsReport,
    pub train_seconds: Option<f64>,
}

pub fn load_run_summary(dir: &Path) -> Result<RunSummary> {
    let report_path = dir.join(REPORT_FILE);
    if !report_path.is_file() {
        return Err(Error::MissingReport(dir.to_path_buf()));
    }
    let text = std::fs::read_to_string(&report_path).map_err(|e| Error::io(&report_path, e))?;
    let report = MetricsReport::from_json(&text)?;
    let train_seconds = std::fs::read_to_string(dir.join(TIMING_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v.get("train_seconds").and_then(|s| s.as_f64()));
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        report,
        train_seconds,
    })
}

/// Text and CSV tables with columns Model, Accuracy (%), Precision, Recall,
/// F-1 Score and Training time, sorted by model id. Model ids that occur
/// more than once are annotated with their seeds.
pub fn comparison_table(runs: &[RunSummary]) -> (String, String) {
    let mut rows: Vec<&RunSummary> = runs.iter().collect();
    rows.sort_by_key(|r| (r.report.model_id, r.report.seed));
    let mut names = Vec::with_capacity(rows.len());
    for r in &rows {
        let id = r.report.model_id;
        let dup = rows.iter().filter(|o| o.report.model_id == id).count() > 1;
        names.push(if dup {
            format!("Model {id} (seed {})", r.report.seed)
        } else {
            format!("Model {id}")
        });
    }
    let header = [
        "Model",
        "Accuracy (%)",
        "Precision",
        "Recall",
        "F-1 Score",
        "Training time",
    ];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .zip(&names)
        .map(|(r, name)| {
            [
                name.clone(),
                format!("{:.2}", r.report.accuracy * 100.0),
                format!("{:.4}", r.report.macro_avg.precision),
                format!("{:.4}", r.report.macro_avg.recall),
                format!("{:.4}", r.report.macro_avg.f1),
                r.train_seconds.map_or("-".into(), |s| format!("{s:.1} s")),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[&str]| {
        let parts: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join(" | ").trim_end().to_string()
    };
    let mut text = line(&header) + "\n";
    text += &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-");
    text.push('\n');
    let mut csv = String::from("model,seed,accuracy_pct,precision,recall,f1,training_seconds\n");
    for (row, r) in cells.iter().zip(&rows) {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        text += &line(&refs);
        text.push('\n');
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.report.model_id,
            r.report.seed,
            row[1],
            row[2],
            row[3],
            row[4],
            r.train_seconds.map_or(String::new(), |s| format!("{s:.3}"))
        );
    }
    (text, csv)
}
