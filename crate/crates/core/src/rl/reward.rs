use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::FaultClass;

/// Payoff for predicting class `p` when the truth is class `a`, stored as
/// `R[a][p]` in canonical class order.
///
/// Every row must pay strictly more for the correct answer than for any
/// wrong one, so greedy play on a perfectly learned value function is
/// correct classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardMatrix {
    rows: [[f64; 3]; 3],
}

impl RewardMatrix {
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        for (a, row) in rows.iter().enumerate() {
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::InvalidRewardMatrix(format!("row {a} has a non-finite entry")));
            }
            for (p, &r) in row.iter().enumerate() {
                if p != a && r >= row[a] {
                    return Err(Error::InvalidRewardMatrix(format!(
                        "row {} ({}): off-diagonal entry {r} is not below the diagonal {}",
                        a,
                        FaultClass::ALL[a],
                        row[a]
                    )));
                }
            }
        }
        Ok(Self { rows })
    }

    /// `+1` for a correct answer, `-1` for any mistake.
    pub fn preset() -> Self {
        Self {
            rows: [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
        }
    }

    /// Shaped matrix that penalizes confusing developing faults with
    /// established faults hardest and faulty-vs-healthy mistakes least.
    pub fn shaped() -> Self {
        Self {
            rows: [[1.0, -1.2, -1.0], [-1.2, 1.0, -0.5], [-1.0, -0.5, 1.0]],
        }
    }

    pub fn get(&self, actual: FaultClass, predicted: FaultClass) -> f64 {
        self.rows[actual.index()][predicted.index()]
    }

    /// Same as [`get`](Self::get) with a raw action index as the prediction.
    pub fn reward(&self, actual: FaultClass, action: usize) -> f64 {
        self.rows[actual.index()][action]
    }

    pub fn row(&self, actual: FaultClass) -> &[f64; 3] {
        &self.rows[actual.index()]
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    /// Parses three comma-separated rows (developing fault, faulty, healthy).
    /// Blank lines and `#` comments are ignored.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if rows.len() != 3 {
            return Err(Error::InvalidRewardMatrix(format!(
                "expected 3 rows, found {}",
                rows.len()
            )));
        }
        let mut out = [[0.0; 3]; 3];
        for (r, line) in rows.iter().enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 3 {
                return Err(Error::InvalidRewardMatrix(format!(
                    "row {} has {} entries, expected 3",
                    r + 1,
                    cells.len()
                )));
            }
            for (c, cell) in cells.iter().enumerate() {
                out[r][c] = cell
                    .parse()
                    .map_err(|_| Error::InvalidRewardMatrix(format!("row {}: {cell:?} is not a number", r + 1)))?;
            }
        }
        RewardMatrix::new(out)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{}", row[0], row[1], row[2]);
        }
        out
    }
}

pub fn reward_lookup(matrix: &RewardMatrix, actual: FaultClass, predicted: FaultClass) -> f64 {
    matrix.get(actual, predicted)
}

pub fn default_reward_matrix() -> RewardMatrix {
    RewardMatrix::preset()
}

/// Running reward total with Neumaier compensation, so ten steps of `-1.2`
/// come to `-12.0` rather than drifting in the last bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardSum {
    sum: f64,
    carry: f64,
}

impl RewardSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
