use crate::error::{Error, Result};

/// Row-major `n x d` matrix of feature vectors with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    values: Vec<f32>,
    labels: Option<Vec<u32>>,
}

impl FeatureSet {
    pub fn new(dim: usize, values: Vec<f32>, labels: Option<Vec<u32>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam(
                "feature dimension must be positive".into(),
            ));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput("feature set has no rows"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::Malformed {
                format: "features",
                reason: format!(
                    "{} values is not a multiple of dimension {dim}",
                    values.len()
                ),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let n = values.len() / dim;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Malformed {
                    format: "features",
                    reason: format!("{} labels for {n} rows", labels.len()),
                });
            }
        }
        Ok(Self {
            dim,
            values,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>], labels: Option<Vec<u32>>) -> Result<Self> {
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or(Error::EmptyInput("feature set has no rows"))?;
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::new(dim, rows.concat(), labels)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Malformed {
                format: "features",
                reason: format!("{} labels for {} rows", labels.len(), self.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Column means accumulated in f64.
    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0f64; self.dim];
        for row in self.rows() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += f64::from(v);
            }
        }
        let n = self.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    pub fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual,
            });
        }
        Ok(())
    }
}

/// Squared euclidean distance, accumulated in f64 left to right over dimensions.
#[inline]
pub fn squared_euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (&x, &y)| {
        let d = f64::from(x) - f64::from(y);
        acc + d * d
    })
}
