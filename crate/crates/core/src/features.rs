//! The two preprocessing pipelines: overlapping raw windows and per-segment
//! statistical feature vectors, plus z-score normalization fitted on the
//! training split.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::signal::{FaultClass, Labeled, LabeledSignal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowingSpec {
    pub window_len: usize,
    pub overlap_fraction: f64,
}

impl Default for WindowingSpec {
    fn default() -> Self {
        Self {
            window_len: 1000,
            overlap_fraction: 0.5,
        }
    }
}

impl WindowingSpec {
    pub fn new(window_len: usize, overlap_fraction: f64) -> Result<Self> {
        let spec = Self {
            window_len,
            overlap_fraction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len < 2 {
            return Err(Error::InvalidParam(format!(
                "window_len must be at least 2, got {}",
                self.window_len
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::InvalidParam(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        if self.step() < 1 {
            return Err(Error::InvalidParam("window step rounds to zero".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> usize {
        (self.window_len as f64 * (1.0 - self.overlap_fraction)).round() as usize
    }

    /// Number of complete windows in a signal of `n` samples.
    pub fn count(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            (n - self.window_len) / self.step() + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub values: Vec<f64>,
    pub label: FaultClass,
    pub parent_id: String,
    pub start_index: usize,
}

impl Labeled for Window {
    fn label(&self) -> FaultClass {
        self.label
    }
}

/// Cuts a signal into windows starting at `0, step, 2*step, ...`; trailing
/// samples that do not fill a window are dropped.
pub fn make_windows(signal: &LabeledSignal, spec: &WindowingSpec) -> Result<Vec<Window>> {
    spec.validate()?;
    let n = signal.samples.len();
    if n < spec.window_len {
        return Err(Error::SignalTooShort {
            len: n,
            window_len: spec.window_len,
        });
    }
    let step = spec.step();
    Ok((0..spec.count(n))
        .map(|k| {
            let start = k * step;
            Window {
                values: signal.samples[start..start + spec.window_len].to_vec(),
                label: signal.label,
                parent_id: signal.source_id.clone(),
                start_index: start,
            }
        })
        .collect())
}

pub fn windows_to_dataset(windows: &[Window]) -> Result<Dataset> {
    let dim = windows.first().map_or(1, |w| w.values.len());
    Dataset::from_rows(dim, windows.iter().map(|w| (w.values.as_slice(), w.label)))
}

pub const FEATURE_NAMES: [&str; 11] = [
    "mean",
    "std_dev",
    "peak_to_peak",
    "rms",
    "skewness",
    "kurtosis",
    "crest_factor",
    "shape_factor",
    "impulse_factor",
    "margin_factor",
    "peak_factor",
];

pub const NUM_FEATURES: usize = FEATURE_NAMES.len();

/// Time-domain statistical descriptors of one segment.
///
/// Moments are population moments and kurtosis is non-excess. `peak_factor`
/// is the absolute peak `max|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatFeatures {
    pub mean: f64,
    pub std_dev: f64,
    pub peak_to_peak: f64,
    pub rms: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub crest_factor: f64,
    pub shape_factor: f64,
    pub impulse_factor: f64,
    pub margin_factor: f64,
    pub peak_factor: f64,
}

impl StatFeatures {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.mean,
            self.std_dev,
            self.peak_to_peak,
            self.rms,
            self.skewness,
            self.kurtosis,
            self.crest_factor,
            self.shape_factor,
            self.impulse_factor,
            self.margin_factor,
            self.peak_factor,
        ]
    }

    pub fn labeled(self, label: FaultClass) -> FeatureVector {
        FeatureVector { features: self, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub features: StatFeatures,
    pub label: FaultClass,
}

impl Labeled for FeatureVector {
    fn label(&self) -> FaultClass {
        self.label
    }
}

pub fn extract_features(segment: &[f64]) -> Result<StatFeatures> {
    let degenerate = |reason| Error::DegenerateSegment { reason, location: None };
    if segment.len() < 2 {
        return Err(degenerate("fewer than two samples"));
    }
    if segment.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParam("segment contains non-finite values".into()));
    }
    let n = segment.len() as f64;

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut sum_abs = 0.0;
    let mut sum_sqrt_abs = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in segment {
        sum += x;
        sum_sq += x * x;
        sum_abs += x.abs();
        sum_sqrt_abs += x.abs().sqrt();
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let mean = sum / n;

    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in segment {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    let std_dev = m2.sqrt();
    let mean_abs = sum_abs / n;
    if std_dev == 0.0 {
        return Err(degenerate("zero variance"));
    }
    if mean_abs == 0.0 {
        return Err(degenerate("all samples zero"));
    }

    let rms = (sum_sq / n).sqrt();
    let peak = hi.abs().max(lo.abs());
    let mean_sqrt_abs = sum_sqrt_abs / n;

    Ok(StatFeatures {
        mean,
        std_dev,
        peak_to_peak: hi - lo,
        rms,
        skewness: m3 / (m2 * std_dev),
        kurtosis: m4 / (m2 * m2),
        crest_factor: peak / rms,
        shape_factor: rms / mean_abs,
        impulse_factor: peak / mean_abs,
        margin_factor: peak / (mean_sqrt_abs * mean_sqrt_abs),
        peak_factor: peak,
    })
}

pub const DEFAULT_SEGMENT_LEN: usize = 10_000;

/// One feature vector per consecutive non-overlapping segment of each signal.
pub fn build_feature_dataset(signals: &[LabeledSignal], segment_len: usize) -> Result<Vec<FeatureVector>> {
    if segment_len < 2 {
        return Err(Error::InvalidParam(format!(
            "segment_len must be at least 2, got {segment_len}"
        )));
    }
    let mut out = Vec::new();
    for signal in signals {
        for (k, segment) in signal.samples.chunks_exact(segment_len).enumerate() {
            let features = extract_features(segment).map_err(|e| match e {
                Error::DegenerateSegment { reason, .. } => Error::DegenerateSegment {
                    reason,
                    location: Some(format!(
                        "{} segment {k} (samples {}..{})",
                        signal.source_id,
                        k * segment_len,
                        (k + 1) * segment_len
                    )),
                },
                other => other,
            })?;
            out.push(features.labeled(signal.label));
        }
    }
    Ok(out)
}

pub fn features_to_dataset(features: &[FeatureVector]) -> Result<Dataset> {
    let rows: Vec<[f64; NUM_FEATURES]> = features.iter().map(|f| f.features.to_array()).collect();
    Dataset::from_rows(
        NUM_FEATURES,
        rows.iter().zip(features).map(|(r, f)| (r.as_slice(), f.label)),
    )
}

pub fn feature_csv(features: &[FeatureVector]) -> String {
    let mut out = FEATURE_NAMES.join(",");
    out.push_str(",label\n");
    for f in features {
        for v in f.features.to_array() {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", f.label);
    }
    out
}

pub fn write_feature_csv(path: &Path, features: &[FeatureVector]) -> Result<()> {
    std::fs::write(path, feature_csv(features)).map_err(|e| Error::io(path, e))
}

/// Per-column z-score transform fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Standard deviations below this are treated as constant columns.
pub const STD_FLOOR: f64 = 1e-12;

impl Normalizer {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n = data.len() as f64;
        let dim = data.dim();
        let mut means = vec![0.0; dim];
        for row in data.rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; dim];
        for row in data.rows() {
            for ((v, x), m) in vars.iter_mut().zip(row).zip(&means) {
                let d = x - m;
                *v += d * d;
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s < STD_FLOOR {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *x = (*x - m) / s;
        }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "normalizer fitted on {} columns applied to {}",
                self.dim(),
                data.dim()
            )));
        }
        Ok(data.map_rows(|row| self.apply_row(row)))
    }
}

pub fn fit_normalizer(train_features: &[FeatureVector]) -> Result<Normalizer> {
    if train_features.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Normalizer::fit(&features_to_dataset(train_features)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn signal(n: usize) -> LabeledSignal {
        LabeledSignal::new((0..n).map(|i| i as f64).collect(), FaultClass::Faulty, 42_000.0, "s").unwrap()
    }

    #[test]
    fn windowing_examples() {
        let spec = WindowingSpec::default();
        assert_eq!(spec.step(), 500);
        let w = make_windows(&signal(2000), &spec).unwrap();
        assert_eq!(w.iter().map(|w| w.start_index).collect::<Vec<_>>(), vec![0, 500, 1000]);
        assert!(w.iter().all(|w| w.label == FaultClass::Faulty && w.parent_id == "s"));
        assert_eq!(make_windows(&signal(1000), &spec).unwrap().len(), 1);
        assert_eq!(make_windows(&signal(420_000), &spec).unwrap().len(), 839);
        assert!(matches!(
            make_windows(&signal(999), &spec),
            Err(Error::SignalTooShort {
                len: 999,
                window_len: 1000
            })
        ));
    }

    #[test]
    fn windowing_spec_validation() {
        assert!(WindowingSpec::new(1, 0.5).is_err());
        assert!(WindowingSpec::new(10, 1.0).is_err());
        assert!(WindowingSpec::new(2, 0.9).is_err());
        assert_eq!(WindowingSpec::new(10, 0.0).unwrap().step(), 10);
    }

    #[test]
    fn windows_are_exact_subslices() {
        let s = signal(3333);
        for w in make_windows(&s, &WindowingSpec::new(250, 0.3).unwrap()).unwrap() {
            assert_eq!(w.values.as_slice(), &s.samples[w.start_index..w.start_index + 250]);
        }
    }

    #[test]
    fn unit_square_wave_features() {
        let f = extract_features(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        let expect = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (name, (got, want)) in FEATURE_NAMES.iter().zip(f.to_array().iter().zip(expect)) {
            assert!((got - want).abs() < 1e-15, "{name}: {got} vs {want}");
        }
    }

    #[test]
    fn two_point_features() {
        let f = extract_features(&[3.0, 4.0]).unwrap();
        assert_eq!(f.mean, 3.5);
        assert_eq!(f.peak_to_peak, 1.0);
        assert!((f.rms - 3.535534).abs() < 1e-6);
        assert!((f.crest_factor - 1.131371).abs() < 1e-6);
    }

    #[test]
    fn degenerate_segments_rejected() {
        assert!(matches!(
            extract_features(&[0.0; 4]),
            Err(Error::DegenerateSegment { .. })
        ));
        assert!(matches!(
            extract_features(&[2.5; 7]),
            Err(Error::DegenerateSegment { .. })
        ));
        assert!(matches!(extract_features(&[1.0]), Err(Error::DegenerateSegment { .. })));
    }

    #[test]
    fn feature_dataset_segment_counts() {
        let mut s = signal(30_000);
        s.samples.iter_mut().for_each(|x| *x = (*x * 0.37).sin());
        assert_eq!(build_feature_dataset(&[s.clone()], 10_000).unwrap().len(), 3);
        s.samples.truncate(9_999);
        assert!(build_feature_dataset(&[s], 10_000).unwrap().is_empty());
    }

    #[test]
    fn feature_dataset_reports_segment_location() {
        let mut s = signal(20);
        s.samples[10..].iter_mut().for_each(|x| *x = 0.0);
        let err = build_feature_dataset(&[s], 10).unwrap_err();
        match err {
            Error::DegenerateSegment {
                location: Some(loc), ..
            } => assert!(loc.contains("segment 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn feature_csv_header() {
        let f = extract_features(&[3.0, 4.0]).unwrap().labeled(FaultClass::Healthy);
        let csv = feature_csv(&[f]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "mean,std_dev,peak_to_peak,rms,skewness,kurtosis,crest_factor,shape_factor,impulse_factor,margin_factor,peak_factor,label"
        );
        assert!(lines.next().unwrap().ends_with(",healthy"));
    }

    fn column(values: &[f64]) -> Dataset {
        Dataset::from_rows(1, values.iter().map(|v| (std::slice::from_ref(v), FaultClass::Healthy))).unwrap()
    }

    #[test]
    fn normalizer_examples() {
        let d = column(&[1.0, 3.0]);
        let n = Normalizer::fit(&d).unwrap();
        assert_eq!(n.apply(&d).unwrap().values(), &[-1.0, 1.0]);

        let c = column(&[4.0, 4.0, 4.0]);
        let n = Normalizer::fit(&c).unwrap();
        assert_eq!(n.stds, vec![1.0]);
        assert_eq!(n.apply(&c).unwrap().values(), &[0.0, 0.0, 0.0]);

        let d = column(&[0.0, 10.0, 20.0]);
        let n = Normalizer::fit(&d).unwrap();
        let once = n.apply(&d).unwrap();
        assert_ne!(n.apply(&once).unwrap(), once);

        assert!(matches!(fit_normalizer(&[]), Err(Error::EmptyTrainingSet)));
        assert!(n
            .apply(&Dataset::new(2, vec![0.0; 2], vec![FaultClass::Faulty]).unwrap())
            .is_err());
    }

    #[test]
    fn crest_at_least_one() {
        let f = extract_features(&[0.1, -3.0, 2.0, 0.5]).unwrap();
        assert!(f.crest_factor >= 1.0);
    }

    proptest! {
        #[test]
        fn features_follow_positive_scaling(
            x in proptest::collection::vec(-10.0f64..10.0, 4..200),
            c in 0.01f64..100.0,
        ) {
            let base = extract_features(&x);
            prop_assume!(base.is_ok());
            let f = base.unwrap();
            prop_assume!(f.std_dev > 1e-3);
            let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
            let g = extract_features(&scaled).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12);
            for (a, b) in [
                (f.skewness, g.skewness),
                (f.kurtosis, g.kurtosis),
                (f.crest_factor, g.crest_factor),
                (f.shape_factor, g.shape_factor),
                (f.impulse_factor, g.impulse_factor),
                (f.margin_factor, g.margin_factor),
            ] {
                prop_assert!(close(a, b), "{a} vs {b}");
            }
            for (a, b) in [
                (f.mean, g.mean),
                (f.std_dev, g.std_dev),
                (f.peak_to_peak, g.peak_to_peak),
                (f.rms, g.rms),
                (f.peak_factor, g.peak_factor),
            ] {
                prop_assert!((a * c - b).abs() <= 1e-9 * b.abs().max(1e-9 * c), "{a}*{c} vs {b}");
            }
        }

        #[test]
        fn window_count_formula(n in 2usize..5000, len in 2usize..600, overlap in 0.0f64..0.95) {
            prop_assume!(n >= len);
            let spec = WindowingSpec { window_len: len, overlap_fraction: overlap };
            prop_assume!(spec.validate().is_ok());
            let brute = (0..=n - len).step_by(spec.step()).count();
            prop_assert_eq!(spec.count(n), brute);
        }

        #[test]
        fn normalized_training_set_is_standard(rows in proptest::collection::vec(proptest::array::uniform3(-1e3f64..1e3), 2..60)) {
            let d = Dataset::from_rows(3, rows.iter().map(|r| (r.as_slice(), FaultClass::Faulty))).unwrap();
            let n = Normalizer::fit(&d).unwrap();
            let z = n.apply(&d).unwrap();
            for j in 0..3 {
                let raw: Vec<f64> = d.rows().map(|r| r[j]).collect();
                if raw.iter().all(|x| *x == raw[0]) {
                    continue;
                }
                let col: Vec<f64> = z.rows().map(|r| r[j]).collect();
                let m = col.iter().sum::<f64>() / col.len() as f64;
                let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64;
                prop_assert!(m.abs() < 1e-9);
                prop_assert!((v.sqrt() - 1.0).abs() < 1e-9);
            }
        }
    }
}
