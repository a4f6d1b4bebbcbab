//! Dataset ingestion, PCA preprocessing and synthetic pattern generation.

mod csv_io;
mod patterns;
mod pca;
mod snp;

pub use csv_io::{load_csv, write_csv, CsvOptions};
pub use patterns::{generate_pattern, sample_curve, PatternKind, PatternSpec};
pub use pca::{pca_fit, pca_project, pca_reconstruct, PcaModel};
pub use snp::{snp_encode, SnpTable};

use thiserror::Error;

/// Errors raised by ingestion, encoding and preprocessing.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset must contain at least one point")]
    Empty,
    #[error("point {0} has dimension {1}, expected {2}")]
    RaggedPoint(usize, usize, usize),
    #[error("non-finite coordinate at point {0}, column {1}")]
    NonFinite(usize, usize),
    #[error("weight {1} at point {0} is negative or non-finite")]
    BadWeight(usize, f64),
    #[error("total weight must be positive")]
    ZeroWeight,
    #[error("column length {0} does not match point count {1}")]
    LengthMismatch(usize, usize),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("file is empty")]
    EmptyFile,
    #[error("column {0:?}: {1}")]
    BadColumn(String, String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("requested {0} components, but min(N, m) = {1}")]
    ComponentsOutOfRange(usize, usize),
}

/// N weighted points in R^m with optional class labels.
///
/// Storage is row-major; all coordinates are finite, weights non-negative
/// with positive sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
    total_weight: f64,
}

impl Dataset {
    /// Builds a dataset from row vectors with unit weights and no labels.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let n = rows.len();
        Self::new(rows, vec![1.0; n], None)
    }

    pub fn new(
        rows: Vec<Vec<f64>>,
        weights: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(DataError::RaggedPoint(0, 0, 1));
        }
        let mut points = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(DataError::RaggedPoint(i, row.len(), dim));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite(i, j));
                }
                points.push(v);
            }
        }
        if weights.len() != rows.len() {
            return Err(DataError::LengthMismatch(weights.len(), rows.len()));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(DataError::BadWeight(i, w));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(DataError::ZeroWeight);
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(DataError::LengthMismatch(labels.len(), rows.len()));
            }
        }
        Ok(Dataset {
            points,
            dim,
            weights,
            labels,
            total_weight: total,
        })
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_points()).map(move |i| self.point(i))
    }

    /// Appends one point, returning a new dataset (used by paired-run tests).
    pub fn with_extra_point(
        &self,
        point: Vec<f64>,
        weight: f64,
        label: Option<String>,
    ) -> Result<Self, DataError> {
        let mut rows: Vec<Vec<f64>> = self.rows().map(|r| r.to_vec()).collect();
        rows.push(point);
        let mut weights = self.weights.clone();
        weights.push(weight);
        let labels = match (&self.labels, label) {
            (Some(existing), Some(extra)) => {
                let mut l = existing.clone();
                l.push(extra);
                Some(l)
            }
            (Some(existing), None) => {
                let mut l = existing.clone();
                l.push(String::new());
                Some(l)
            }
            (None, _) => None,
        };
        Dataset::new(rows, weights, labels)
    }
}
