//! Labeled vibration recordings: loading from disk, synthetic generation and
//! the train/test split.
//!
//! Two on-disk encodings are understood. `.csv` files hold one decimal sample
//! per line (LF or CRLF). `.f32` files are packed little-endian `f32` values
//! without a header. A `manifest.csv` with header `path,label` ties files to
//! fault classes; relative paths resolve against the manifest's directory.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three bearing health states.
///
/// The canonical index order (`DevelopingFault`, `Faulty`, `Healthy`) is the
/// row/column order used by reward matrices and confusion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultClass {
    DevelopingFault,
    Faulty,
    Healthy,
}

impl FaultClass {
    pub const COUNT: usize = 3;
    pub const ALL: [FaultClass; 3] = [FaultClass::DevelopingFault, FaultClass::Faulty, FaultClass::Healthy];

    pub fn index(self) -> usize {
        match self {
            FaultClass::DevelopingFault => 0,
            FaultClass::Faulty => 1,
            FaultClass::Healthy => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<FaultClass> {
        FaultClass::ALL.get(index).copied()
    }

    /// Lowercase snake-case name used in manifests, CSV and JSON.
    pub fn as_str(self) -> &'static str {
        match self {
            FaultClass::DevelopingFault => "developing_fault",
            FaultClass::Faulty => "faulty",
            FaultClass::Healthy => "healthy",
        }
    }
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaultClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "developing_fault" => Ok(FaultClass::DevelopingFault),
            "faulty" => Ok(FaultClass::Faulty),
            "healthy" => Ok(FaultClass::Healthy),
            other => Err(Error::InvalidParam(format!(
                "unknown fault class {other:?} (expected healthy, developing_fault or faulty)"
            ))),
        }
    }
}

/// Anything that carries a fault class label; lets the split work on raw
/// signals, windows or feature vectors alike.
pub trait Labeled {
    fn label(&self) -> FaultClass;
}

/// One vibration recording.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub samples: Vec<f64>,
    pub label: FaultClass,
    pub sample_rate_hz: f64,
    pub source_id: String,
}

impl LabeledSignal {
    pub fn new(
        samples: Vec<f64>,
        label: FaultClass,
        sample_rate_hz: f64,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let source_id = source_id.into();
        if samples.is_empty() {
            return Err(Error::InvalidParam(format!("signal {source_id} has no samples")));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "signal {source_id}: sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample {
                path: PathBuf::from(&source_id),
                index,
            });
        }
        Ok(Self {
            samples,
            label,
            sample_rate_hz,
            source_id,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl Labeled for LabeledSignal {
    fn label(&self) -> FaultClass {
        self.label
    }
}

/// Sampling rate of the recordings the toolkit targets (42 kHz).
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 42_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    F32Le,
}

impl SampleFormat {
    pub fn from_path(path: &Path) -> Option<SampleFormat> {
        match path.extension()?.to_str()? {
            "csv" => Some(SampleFormat::Csv),
            "f32" => Some(SampleFormat::F32Le),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: FaultClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub format: SampleFormat,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>, format: SampleFormat) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if !seen.insert(&e.path) {
                return Err(Error::InvalidParam(format!(
                    "duplicate manifest path {}",
                    e.path.display()
                )));
            }
        }
        Ok(Self { entries, format })
    }

    /// Reads a `path,label` manifest. The sample format is taken from the file
    /// extensions, which must agree across entries.
    pub fn read(manifest_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(manifest_path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(manifest_path.to_path_buf())
            } else {
                Error::io(manifest_path, e)
            }
        })?;
        let base = manifest_path.parent().unwrap_or_else(|| Path::new(""));
        let parse_err = |line: usize, reason: String| Error::Parse {
            path: manifest_path.to_path_buf(),
            location: format!("line {line}"),
            reason,
        };

        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "path,label" => {}
            _ => return Err(parse_err(1, "expected header `path,label`".into())),
        }

        let mut entries = Vec::new();
        let mut format = None;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (path, label) = line
                .rsplit_once(',')
                .ok_or_else(|| parse_err(i + 1, "expected `path,label`".into()))?;
            let label: FaultClass = label.parse().map_err(|e: Error| parse_err(i + 1, e.to_string()))?;
            let path = base.join(path.trim());
            let entry_format = SampleFormat::from_path(&path)
                .ok_or_else(|| parse_err(i + 1, format!("unknown signal file extension: {}", path.display())))?;
            match format {
                None => format = Some(entry_format),
                Some(f) if f != entry_format => return Err(parse_err(i + 1, "mixed signal file formats".into())),
                _ => {}
            }
            entries.push(ManifestEntry { path, label });
        }
        DatasetManifest::new(entries, format.unwrap_or(SampleFormat::F32Le))
    }
}

/// Decodes every manifest entry, in manifest order.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Vec<LabeledSignal>> {
    manifest
        .entries
        .iter()
        .map(|entry| {
            let samples = match manifest.format {
                SampleFormat::Csv => read_csv_samples(&entry.path)?,
                SampleFormat::F32Le => read_f32le_samples(&entry.path)?,
            };
            if samples.is_empty() {
                return Err(Error::Parse {
                    path: entry.path.clone(),
                    location: "offset 0".into(),
                    reason: "file holds no samples".into(),
                });
            }
            Ok(LabeledSignal {
                samples,
                label: entry.label,
                sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
                source_id: entry.path.display().to_string(),
            })
        })
        .collect()
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

pub fn read_csv_samples(path: &Path) -> Result<Vec<f64>> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        location: format!("offset {}", e.valid_up_to()),
        reason: "invalid UTF-8".into(),
    })?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        // `lines` already strips a trailing '\r' from CRLF files.
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            location: format!("line {}", i + 1),
            reason: format!("not a number: {line:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::NonFiniteSample {
                path: path.to_path_buf(),
                index: samples.len(),
            });
        }
        samples.push(value);
    }
    Ok(samples)
}

pub fn read_f32le_samples(path: &Path) -> Result<Vec<f64>> {
    let bytes = read_file(path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            location: format!("offset {}", bytes.len() - bytes.len() % 4),
            reason: "file length is not a multiple of 4 bytes".into(),
        });
    }
    bytes
        .chunks_exact(4)
        .enumerate()
        .map(|(index, chunk)| {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if v.is_finite() {
                Ok(f64::from(v))
            } else {
                Err(Error::NonFiniteSample {
                    path: path.to_path_buf(),
                    index,
                })
            }
        })
        .collect()
}

pub fn write_f32le_samples(path: &Path, samples: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(samples.len() * 4);
    for &s in samples {
        bytes.extend_from_slice(&(s as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes signals as `.f32` files plus `manifest.csv` into `dir` and returns
/// the manifest path.
pub fn write_dataset(dir: &Path, signals: &[LabeledSignal]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("path,label\n");
    for (i, signal) in signals.iter().enumerate() {
        let name = format!("{:05}_{}.f32", i, signal.label);
        write_f32le_samples(&dir.join(&name), &signal.samples)?;
        manifest.push_str(&format!("{name},{}\n", signal.label));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Parameters of the synthetic recording generator.
///
/// Each recording is a shaft-rate sinusoid plus white Gaussian noise plus,
/// for faulty classes, a periodic train of decaying resonance bursts.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub signal_len: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    /// Burst amplitude per class, ordered (healthy, developing fault, faulty).
    pub impulse_amp: (f64, f64, f64),
}

impl SyntheticSpec {
    pub fn new(
        n_per_class: usize,
        signal_len: usize,
        seed: u64,
        noise_sigma: f64,
        impulse_amp: (f64, f64, f64),
    ) -> Self {
        Self {
            n_per_class,
            signal_len,
            seed,
            noise_sigma,
            impulse_amp,
        }
    }

    fn amplitude(&self, class: FaultClass) -> f64 {
        match class {
            FaultClass::Healthy => self.impulse_amp.0,
            FaultClass::DevelopingFault => self.impulse_amp.1,
            FaultClass::Faulty => self.impulse_amp.2,
        }
    }
}

const SHAFT_HZ: f64 = 25.0;
const SHAFT_AMPLITUDE: f64 = 1.0;
const DEFECT_HZ: f64 = 105.0;
const RESONANCE_HZ: f64 = 3_000.0;
const BURST_DECAY_S: f64 = 0.001;
const MIN_SYNTHETIC_LEN: usize = 1000;

/// Generates `3 * n_per_class` recordings grouped by class in canonical order.
/// The output is a pure function of `spec`.
pub fn generate_synthetic_dataset(spec: &SyntheticSpec) -> Result<Vec<LabeledSignal>> {
    if spec.n_per_class == 0 {
        return Err(Error::InvalidParam("n_per_class must be at least 1".into()));
    }
    if spec.signal_len < MIN_SYNTHETIC_LEN {
        return Err(Error::InvalidParam(format!(
            "signal_len must be at least {MIN_SYNTHETIC_LEN}, got {}",
            spec.signal_len
        )));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "noise_sigma must be a non-negative number, got {}",
            spec.noise_sigma
        )));
    }
    let (h, d, f) = spec.impulse_amp;
    if [h, d, f].iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(Error::InvalidParam("impulse amplitudes must be non-negative".into()));
    }
    if h != 0.0 {
        return Err(Error::InvalidParam("healthy impulse amplitude must be 0".into()));
    }

    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidParam(format!("noise_sigma: {e}")))?;
    let fs = DEFAULT_SAMPLE_RATE_HZ;
    let defect_period = fs / DEFECT_HZ;

    let mut signals = Vec::with_capacity(3 * spec.n_per_class);
    for class in FaultClass::ALL {
        let amp = spec.amplitude(class);
        for i in 0..spec.n_per_class {
            let stream = (class.index() * spec.n_per_class + i) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(stream);

            let phase = rng.gen_range(0.0..2.0 * PI);
            let first_burst = rng.gen_range(0.0..defect_period);
            let mut samples: Vec<f64> = (0..spec.signal_len)
                .map(|n| {
                    let t = n as f64 / fs;
                    SHAFT_AMPLITUDE * (2.0 * PI * SHAFT_HZ * t + phase).sin() + noise.sample(&mut rng)
                })
                .collect();
            if amp > 0.0 {
                add_burst_train(&mut samples, fs, first_burst, defect_period, amp);
            }
            signals.push(LabeledSignal {
                samples,
                label: class,
                sample_rate_hz: fs,
                source_id: format!("synthetic-{}-{:05}", class, i),
            });
        }
    }
    Ok(signals)
}

fn add_burst_train(samples: &mut [f64], fs: f64, first: f64, period: f64, amp: f64) {
    let tail = (8.0 * BURST_DECAY_S * fs).ceil() as usize;
    let mut onset = first;
    while (onset as usize) < samples.len() {
        let start = onset.ceil() as usize;
        let end = (start + tail).min(samples.len());
        for (n, s) in samples[start..end].iter_mut().enumerate() {
            let t = (start + n) as f64 / fs - onset / fs;
            *s += amp * (-t / BURST_DECAY_S).exp() * (2.0 * PI * RESONANCE_HZ * t).sin();
        }
        onset += period;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64, stratified: bool) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "train_fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
            stratified,
        })
    }

    /// 80/20, stratified.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            train_fraction: 0.8,
            seed,
            stratified: true,
        }
    }

    fn test_count(&self, n: usize) -> usize {
        ((1.0 - self.train_fraction) * n as f64).round() as usize
    }
}

/// Seeded (optionally stratified) train/test partition.
///
/// Both halves come back in a seeded shuffled order.
pub fn split_train_test<T: Labeled + Clone>(data: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>)> {
    if data.is_empty() {
        return Err(Error::InvalidParam("cannot split an empty dataset".into()));
    }
    SplitSpec::new(spec.train_fraction, spec.seed, spec.stratified)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    if spec.stratified {
        for class in FaultClass::ALL {
            let mut members: Vec<usize> = (0..data.len()).filter(|&i| data[i].label() == class).collect();
            if members.is_empty() {
                return Err(Error::EmptyClass(class.as_str()));
            }
            members.shuffle(&mut rng);
            let n_test = spec.test_count(members.len());
            test_idx.extend_from_slice(&members[..n_test]);
            train_idx.extend_from_slice(&members[n_test..]);
        }
        train_idx.shuffle(&mut rng);
        test_idx.shuffle(&mut rng);
    } else {
        let mut all: Vec<usize> = (0..data.len()).collect();
        all.shuffle(&mut rng);
        let n_test = spec.test_count(all.len());
        test_idx.extend_from_slice(&all[..n_test]);
        train_idx.extend_from_slice(&all[n_test..]);
    }

    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<T>>();
    Ok((pick(&train_idx), pick(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[derive(Clone, Debug, PartialEq)]
    struct Item(usize, FaultClass);

    impl Labeled for Item {
        fn label(&self) -> FaultClass {
            self.1
        }
    }

    fn balanced(per_class: usize) -> Vec<Item> {
        (0..3 * per_class).map(|i| Item(i, FaultClass::ALL[i % 3])).collect()
    }

    #[test]
    fn class_index_roundtrip() {
        for c in FaultClass::ALL {
            assert_eq!(FaultClass::from_index(c.index()), Some(c));
            assert_eq!(c.as_str().parse::<FaultClass>().unwrap(), c);
        }
        assert_eq!(FaultClass::from_index(3), None);
        assert_eq!(FaultClass::Faulty.index(), 1);
    }

    #[test]
    fn empty_manifest_loads_nothing() {
        let m = DatasetManifest::new(vec![], SampleFormat::Csv).unwrap();
        assert!(load_dataset(&m).unwrap().is_empty());
    }

    #[test]
    fn csv_signal_decodes_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "1.0\r\n-2.5\r\n0.0\r\n").unwrap();
        let m = DatasetManifest::new(
            vec![ManifestEntry {
                path,
                label: FaultClass::Healthy,
            }],
            SampleFormat::Csv,
        )
        .unwrap();
        let signals = load_dataset(&m).unwrap();
        assert_eq!(signals.len(), 1);
        assert_eq!(signals[0].samples, vec![1.0, -2.5, 0.0]);
        assert_eq!(signals[0].label, FaultClass::Healthy);
    }

    #[test]
    fn f32_signal_of_full_recording_length() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.f32");
        let samples: Vec<f64> = (0..420_000).map(|i| (i % 17) as f64 * 0.25).collect();
        write_f32le_samples(&path, &samples).unwrap();
        let m = DatasetManifest::new(
            vec![ManifestEntry {
                path,
                label: FaultClass::Faulty,
            }],
            SampleFormat::F32Le,
        )
        .unwrap();
        let signals = load_dataset(&m).unwrap();
        assert_eq!(signals[0].samples.len(), 420_000);
        assert_eq!(signals[0].samples, samples);
    }

    #[test]
    fn loader_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        let m = DatasetManifest::new(
            vec![ManifestEntry {
                path: missing.clone(),
                label: FaultClass::Healthy,
            }],
            SampleFormat::Csv,
        )
        .unwrap();
        assert!(matches!(load_dataset(&m), Err(Error::MissingFile(p)) if p == missing));

        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "1.0\nabc\n").unwrap();
        let err = read_csv_samples(&bad).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "line 2"));

        let nan = dir.path().join("nan.csv");
        fs::write(&nan, "1.0\nNaN\n").unwrap();
        assert!(matches!(
            read_csv_samples(&nan),
            Err(Error::NonFiniteSample { index: 1, .. })
        ));

        let inf = dir.path().join("inf.f32");
        let mut f = fs::File::create(&inf).unwrap();
        f.write_all(&1.0f32.to_le_bytes()).unwrap();
        f.write_all(&f32::INFINITY.to_le_bytes()).unwrap();
        drop(f);
        assert!(matches!(
            read_f32le_samples(&inf),
            Err(Error::NonFiniteSample { index: 1, .. })
        ));

        let ragged = dir.path().join("ragged.f32");
        fs::write(&ragged, [0u8; 6]).unwrap();
        assert!(matches!(read_f32le_samples(&ragged), Err(Error::Parse { .. })));
    }

    #[test]
    fn manifest_roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::new(2, 1000, 3, 0.1, (0.0, 0.5, 2.0));
        let signals = generate_synthetic_dataset(&spec).unwrap();
        let manifest_path = write_dataset(dir.path(), &signals).unwrap();
        let manifest = DatasetManifest::read(&manifest_path).unwrap();
        assert_eq!(manifest.format, SampleFormat::F32Le);
        let loaded = load_dataset(&manifest).unwrap();
        assert_eq!(loaded.len(), signals.len());
        for (a, b) in loaded.iter().zip(&signals) {
            assert_eq!(a.label, b.label);
            for (x, y) in a.samples.iter().zip(&b.samples) {
                assert_eq!(*x, (*y as f32) as f64);
            }
        }
    }

    #[test]
    fn manifest_rejects_duplicates_and_bad_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("manifest.csv");
        fs::write(&p, "path,label\na.csv,healthy\na.csv,faulty\n").unwrap();
        assert!(matches!(DatasetManifest::read(&p), Err(Error::InvalidParam(_))));
        fs::write(&p, "path,label\na.csv,broken\n").unwrap();
        assert!(matches!(DatasetManifest::read(&p), Err(Error::Parse { .. })));
        fs::write(&p, "file,class\n").unwrap();
        assert!(matches!(DatasetManifest::read(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn synthetic_healthy_has_no_impulses() {
        let with = generate_synthetic_dataset(&SyntheticSpec::new(1, 2000, 5, 0.0, (0.0, 0.5, 2.0))).unwrap();
        assert_eq!(with.len(), 3);
        let healthy = with.iter().find(|s| s.label == FaultClass::Healthy).unwrap();
        // Noise-free healthy recording is a pure unit sinusoid.
        assert!(healthy.samples.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        let faulty = with.iter().find(|s| s.label == FaultClass::Faulty).unwrap();
        assert!(faulty.samples.iter().any(|x| x.abs() > 1.5));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::new(3, 1500, 11, 0.1, (0.0, 0.5, 2.0));
        let a = generate_synthetic_dataset(&spec).unwrap();
        let b = generate_synthetic_dataset(&spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let xb: Vec<u64> = x.samples.iter().map(|v| v.to_bits()).collect();
            let yb: Vec<u64> = y.samples.iter().map(|v| v.to_bits()).collect();
            assert_eq!(xb, yb);
        }
        let c = generate_synthetic_dataset(&SyntheticSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a[0].samples, c[0].samples);
    }

    #[test]
    fn synthetic_rejects_bad_params() {
        let ok = SyntheticSpec::new(1, 1000, 0, 0.1, (0.0, 0.5, 2.0));
        assert!(generate_synthetic_dataset(&SyntheticSpec {
            n_per_class: 0,
            ..ok.clone()
        })
        .is_err());
        assert!(generate_synthetic_dataset(&SyntheticSpec {
            signal_len: 999,
            ..ok.clone()
        })
        .is_err());
        assert!(generate_synthetic_dataset(&SyntheticSpec {
            impulse_amp: (0.0, -0.1, 1.0),
            ..ok.clone()
        })
        .is_err());
        assert!(generate_synthetic_dataset(&SyntheticSpec {
            noise_sigma: -1.0,
            ..ok
        })
        .is_err());
    }

    #[test]
    fn stratified_80_20_counts() {
        let data = balanced(100);
        let (train, test) = split_train_test(&data, &SplitSpec::with_seed(1)).unwrap();
        assert_eq!(train.len(), 240);
        assert_eq!(test.len(), 60);
        for c in FaultClass::ALL {
            assert_eq!(test.iter().filter(|x| x.1 == c).count(), 20);
        }
    }

    #[test]
    fn unstratified_rounding_base_case() {
        let data: Vec<Item> = (0..5).map(|i| Item(i, FaultClass::Faulty)).collect();
        let spec = SplitSpec::new(0.8, 0, false).unwrap();
        let (train, test) = split_train_test(&data, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (4, 1));
    }

    #[test]
    fn split_determinism_and_seed_sensitivity() {
        let data = balanced(50);
        let a = split_train_test(&data, &SplitSpec::with_seed(9)).unwrap();
        let b = split_train_test(&data, &SplitSpec::with_seed(9)).unwrap();
        let c = split_train_test(&data, &SplitSpec::with_seed(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn split_errors() {
        let data: Vec<Item> = (0..4).map(|i| Item(i, FaultClass::Healthy)).collect();
        assert!(matches!(
            split_train_test(&data, &SplitSpec::with_seed(0)),
            Err(Error::EmptyClass("developing_fault"))
        ));
        assert!(split_train_test::<Item>(&[], &SplitSpec::with_seed(0)).is_err());
        assert!(SplitSpec::new(1.0, 0, true).is_err());
        assert!(SplitSpec::new(0.0, 0, true).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_partition(counts in proptest::array::uniform3(1usize..40), frac in 0.05f64..0.95, seed: u64, stratified: bool) {
            let mut data = Vec::new();
            for (k, &n) in counts.iter().enumerate() {
                for _ in 0..n {
                    data.push(Item(data.len(), FaultClass::ALL[k]));
                }
            }
            let spec = SplitSpec::new(frac, seed, stratified).unwrap();
            let (train, test) = split_train_test(&data, &spec).unwrap();
            prop_assert_eq!(train.len() + test.len(), data.len());
            let mut ids: Vec<usize> = train.iter().chain(&test).map(|x| x.0).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..data.len()).collect::<Vec<_>>());
            if stratified {
                for (k, &n) in counts.iter().enumerate() {
                    let in_test = test.iter().filter(|x| x.1 == FaultClass::ALL[k]).count() as f64;
                    let ideal = (1.0 - frac) * n as f64;
                    prop_assert!((in_test - ideal).abs() <= 1.0);
                }
            }
        }
    }
}
