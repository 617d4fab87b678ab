//! Confusion matrices, precision/recall/F1, reward curves and the report
//! JSON.
//!
//! Report JSON is written by hand rather than through a serializer so that
//! keys come out sorted and every float has exactly six decimals; two runs
//! with identical inputs produce identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::EpisodeRecord;
use crate::signal::FaultClass;

/// `counts[actual][predicted]` in canonical class order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|k| self.counts[k][k]).sum()
    }

    pub fn get(&self, actual: FaultClass, predicted: FaultClass) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn support(&self, class: FaultClass) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn predicted(&self, class: FaultClass) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("actual,developing_fault,faulty,healthy\n");
        for class in FaultClass::ALL {
            let row = self.counts[class.index()];
            let _ = writeln!(out, "{class},{},{},{}", row[0], row[1], row[2]);
        }
        out
    }
}

pub fn confusion_from_predictions(actuals: &[FaultClass], predictions: &[FaultClass]) -> Result<ConfusionMatrix> {
    if actuals.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            actuals: actuals.len(),
            predictions: predictions.len(),
        });
    }
    if actuals.is_empty() {
        return Err(Error::InvalidParam("no predictions to score".into()));
    }
    let mut c = ConfusionMatrix::default();
    for (a, p) in actuals.iter().zip(predictions) {
        c.counts[a.index()][p.index()] += 1;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScores {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: [ClassScores; 3],
    pub macro_avg: ClassScores,
    /// Quantities that were 0/0 and reported as 0, e.g. `faulty.precision`.
    pub zero_division: Vec<String>,
}

/// Per-class and macro-averaged scores. Undefined ratios (an empty row or
/// column) are reported as 0 and listed in `zero_division`.
pub fn metrics_from_confusion(c: &ConfusionMatrix) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::InvalidParam("confusion matrix is empty".into()));
    }
    let mut zero_division = Vec::new();
    let ratio = |num: u64, den: u64, what: String, flags: &mut Vec<String>| {
        if den == 0 {
            flags.push(what);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let mut per_class = [ClassScores::default(); 3];
    for class in FaultClass::ALL {
        let tp = c.get(class, class);
        let precision = ratio(tp, c.predicted(class), format!("{class}.precision"), &mut zero_division);
        let recall = ratio(tp, c.support(class), format!("{class}.recall"), &mut zero_division);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            zero_division.push(format!("{class}.f1"));
            0.0
        };
        per_class[class.index()] = ClassScores { f1, precision, recall };
    }
    let mean = |f: fn(&ClassScores) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
    let macro_avg = ClassScores {
        f1: mean(|s| s.f1),
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
    };
    Ok(Metrics {
        accuracy: c.trace() as f64 / total as f64,
        per_class,
        macro_avg,
        zero_division,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cumulative_reward: f64,
    pub episode: usize,
    pub epsilon: f64,
}

/// Cumulative reward per completed episode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewardCurve {
    pub points: Vec<CurvePoint>,
}

impl RewardCurve {
    pub fn from_episodes(episodes: &[EpisodeRecord]) -> Self {
        Self {
            points: episodes
                .iter()
                .map(|e| CurvePoint {
                    cumulative_reward: e.cumulative_reward,
                    episode: e.episode,
                    epsilon: e.epsilon,
                })
                .collect(),
        }
    }

    pub fn total_reward(&self) -> f64 {
        self.points.iter().map(|p| p.cumulative_reward).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,cumulative_reward,epsilon\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.episode, p.cumulative_reward, p.epsilon);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClassScores {
    pub developing_fault: ClassScores,
    pub faulty: ClassScores,
    pub healthy: ClassScores,
}

impl PerClassScores {
    fn from_array(a: [ClassScores; 3]) -> Self {
        Self {
            developing_fault: a[0],
            faulty: a[1],
            healthy: a[2],
        }
    }

    pub fn get(&self, class: FaultClass) -> &ClassScores {
        match class {
            FaultClass::DevelopingFault => &self.developing_fault,
            FaultClass::Faulty => &self.faulty,
            FaultClass::Healthy => &self.healthy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub config_digest: String,
    pub confusion: [[u64; 3]; 3],
    #[serde(rename = "macro")]
    pub macro_avg: ClassScores,
    pub model_id: u8,
    pub per_class: PerClassScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_curve: Option<Vec<CurvePoint>>,
    pub seed: u64,
    #[serde(default)]
    pub zero_division: Vec<String>,
}

pub fn build_report(
    model_id: u8,
    seed: u64,
    config_digest: &str,
    predictions: &[FaultClass],
    actuals: &[FaultClass],
    reward_curve: Option<&RewardCurve>,
) -> Result<MetricsReport> {
    let confusion = confusion_from_predictions(actuals, predictions)?;
    let m = metrics_from_confusion(&confusion)?;
    Ok(MetricsReport {
        accuracy: m.accuracy,
        config_digest: config_digest.to_string(),
        confusion: confusion.counts,
        macro_avg: m.macro_avg,
        model_id,
        per_class: PerClassScores::from_array(m.per_class),
        reward_curve: reward_curve.map(|c| c.points.clone()),
        seed,
        zero_division: m.zero_division,
    })
}

fn fixed(v: f64) -> String {
    // Avoid "-0.000000".
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

fn scores_json(s: &ClassScores) -> String {
    format!(
        "{{\"f1\": {}, \"precision\": {}, \"recall\": {}}}",
        fixed(s.f1),
        fixed(s.precision),
        fixed(s.recall)
    )
}

impl MetricsReport {
    pub fn confusion_matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix { counts: self.confusion }
    }

    /// Deterministic JSON: sorted keys, two-space indentation, floats with six
    /// decimals, trailing newline.
    pub fn to_json(&self) -> String {
        let mut o = String::from("{\n");
        let _ = writeln!(o, "  \"accuracy\": {},", fixed(self.accuracy));
        let _ = writeln!(o, "  \"config_digest\": {},", json_string(&self.config_digest));
        let rows: Vec<String> = self
            .confusion
            .iter()
            .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
            .collect();
        let _ = writeln!(o, "  \"confusion\": [{}],", rows.join(", "));
        let _ = writeln!(o, "  \"macro\": {},", scores_json(&self.macro_avg));
        let _ = writeln!(o, "  \"model_id\": {},", self.model_id);
        o.push_str("  \"per_class\": {\n");
        for (i, class) in FaultClass::ALL.iter().enumerate() {
            let sep = if i < 2 { "," } else { "" };
            let _ = writeln!(o, "    \"{class}\": {}{sep}", scores_json(self.per_class.get(*class)));
        }
        o.push_str("  },\n");
        if let Some(curve) = &self.reward_curve {
            o.push_str("  \"reward_curve\": [");
            for (i, p) in curve.iter().enumerate() {
                if i > 0 {
                    o.push(',');
                }
                let _ = write!(
                    o,
                    "\n    {{\"cumulative_reward\": {}, \"episode\": {}, \"epsilon\": {}}}",
                    fixed(p.cumulative_reward),
                    p.episode,
                    fixed(p.epsilon)
                );
            }
            o.push_str(if curve.is_empty() { "],\n" } else { "\n  ],\n" });
        }
        let _ = writeln!(o, "  \"seed\": {},", self.seed);
        let flags: Vec<String> = self.zero_division.iter().map(|s| json_string(s)).collect();
        let _ = writeln!(o, "  \"zero_division\": [{}]", flags.join(", "));
        o.push_str("}\n");
        o
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Report(format!("malformed report JSON: {e}")))
    }
}
