use crate::error::{Error, Result};
use crate::signal::{FaultClass, Labeled};

/// Dense row-major matrix of network inputs with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<FaultClass>,
}

impl Dataset {
    pub fn new(dim: usize, values: Vec<f64>, labels: Vec<FaultClass>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch(
                "dataset rows must have at least one column".into(),
            ));
        }
        if values.len() != dim * labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not form {} rows of width {dim}",
                values.len(),
                labels.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("dataset contains non-finite values".into()));
        }
        Ok(Self { dim, values, labels })
    }

    pub fn from_rows<'a, I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], FaultClass)>,
    {
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (row, label) in rows {
            if row.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "row of width {} in a dataset of width {dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
            labels.push(label);
        }
        Dataset::new(dim, values, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[FaultClass] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> FaultClass {
        self.labels[i]
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Copies the selected rows into a contiguous batch.
    pub fn gather(&self, indices: &[usize], out: &mut Vec<f64>) {
        out.clear();
        for &i in indices {
            out.extend_from_slice(self.row(i));
        }
    }

    pub fn map_rows(&self, mut f: impl FnMut(&mut [f64])) -> Dataset {
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.dim) {
            f(row);
        }
        Dataset {
            dim: self.dim,
            values,
            labels: self.labels.clone(),
        }
    }
}

/// A single row borrowed from a [`Dataset`], usable with the generic split.
#[derive(Debug, Clone)]
pub struct Example {
    pub values: Vec<f64>,
    pub label: FaultClass,
}

impl Labeled for Example {
    fn label(&self) -> FaultClass {
        self.label
    }
}
