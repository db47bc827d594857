//! Datasets with binary labels and the [-1, 1] feature normalization used by
//! every trainer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. `Pos` is the minority class of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn to_i8(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Pos
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_i8())
    }
}

/// An m x n feature matrix with one label per row.
///
/// Rows are immutable after construction: every row has exactly `n` finite
/// entries and every label is +1 or -1. A dataset may contain a single class;
/// trainers check their own class requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = feature_names.len();
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        for (row, x) in features.iter().enumerate() {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.len(),
                });
            }
            for (j, v) in x.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row,
                        column: feature_names[j].clone(),
                    });
                }
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Number of examples m.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Number of features n.
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.iter().map(|r| r.as_slice())
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Row indices of the minority (positive) class, in dataset order.
    pub fn positive_rows(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i].is_positive())
            .collect()
    }

    /// Row indices of the majority (negative) class, in dataset order.
    pub fn negative_rows(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.labels[i].is_positive())
            .collect()
    }

    pub fn count_positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn count_negatives(&self) -> usize {
        self.len() - self.count_positives()
    }

    /// |S-| / |S+|.
    pub fn imbalance_ratio(&self) -> f64 {
        self.count_negatives() as f64 / self.count_positives() as f64
    }

    /// New dataset with the given rows, preserving their order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: rows.iter().map(|&i| self.features[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Loads a CSV file with a header row. Labels come from `label_column`;
    /// a cell equal to `positive_label` maps to +1, anything else to -1.
    /// Row order is preserved.
    pub fn load_csv(path: &Path, label_column: &str, positive_label: &str) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
        let header = reader
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .clone();
        let label_idx = header
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| Error::MissingColumn {
                column: label_column.to_string(),
            })?;
        let feature_names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, h)| h.to_string())
            .collect();

        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let mut x = Vec::with_capacity(feature_names.len());
            for (j, cell) in record.iter().enumerate() {
                if j == label_idx {
                    labels.push(if cell == positive_label {
                        Label::Pos
                    } else {
                        Label::Neg
                    });
                } else {
                    let v: f64 = cell.trim().parse().map_err(|_| Error::UnparsableCell {
                        row,
                        column: header[j].to_string(),
                        value: cell.to_string(),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            row,
                            column: header[j].to_string(),
                        });
                    }
                    x.push(v);
                }
            }
            features.push(x);
        }
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Dataset::new(features, labels, feature_names)
    }
}

/// Per-feature observed minimum and maximum, defining the affine map onto
/// [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormParams {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        for j in 0..min.len() {
            if !(min[j].is_finite() && max[j].is_finite()) || min[j] > max[j] {
                return Err(Error::InvalidConfig(format!(
                    "normalization range for feature {j} is invalid: [{}, {}]",
                    min[j], max[j]
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Maps an original value of feature `j` into [-1, 1]. A constant feature
    /// (min = max) maps to 0 regardless of the input.
    pub fn apply_value(&self, j: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[j], self.max[j]);
        if lo == hi {
            0.0
        } else {
            2.0 * (x - lo) / (hi - lo) - 1.0
        }
    }

    /// Inverse of [`apply_value`](Self::apply_value). Infinite inputs pass
    /// through unchanged; for a constant feature every finite input maps back
    /// to the constant.
    pub fn invert_value(&self, j: usize, v: f64) -> f64 {
        if v.is_infinite() {
            return v;
        }
        let (lo, hi) = (self.min[j], self.max[j]);
        lo + (v + 1.0) * (hi - lo) / 2.0
    }
}

/// Affinely maps every feature so the observed minimum lands on -1 and the
/// maximum on +1, returning the rescaled dataset and the recorded ranges.
pub fn normalize(data: &Dataset) -> Result<(Dataset, NormParams)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.n_features();
    let mut min = vec![f64::INFINITY; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for x in data.rows() {
        for j in 0..n {
            min[j] = min[j].min(x[j]);
            max[j] = max[j].max(x[j]);
        }
    }
    let params = NormParams::new(min, max)?;
    let features = data
        .rows()
        .map(|x| (0..n).map(|j| params.apply_value(j, x[j])).collect())
        .collect();
    let normalized = Dataset::new(
        features,
        data.labels().to_vec(),
        data.feature_names().to_vec(),
    )?;
    Ok((normalized, params))
}
