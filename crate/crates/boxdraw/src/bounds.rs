//! Counting-based generalization bound for box drawings with boundaries
//! anchored on finite per-dimension grids, and the empirical risk it bounds.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::exactboxes::objective_value;
use crate::model::BoxModel;

/// Inputs to the bound: K boxes over n per-dimension grids of sizes `grid_sizes`,
/// m samples, confidence 1 - delta.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub k: usize,
    pub grid_sizes: Vec<u64>,
    pub m: usize,
    pub delta: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".to_string()));
        }
        if self.grid_sizes.is_empty() || self.grid_sizes.iter().any(|&mj| mj < 2) {
            return Err(Error::InvalidConfig(
                "every grid size must be at least 2".to_string(),
            ));
        }
        if self.m < 1 {
            return Err(Error::InvalidConfig("m must be at least 1".to_string()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be in (0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Result of [`generalization_bound`]. `clamped` flags a negative log-count
/// term (the bound is vacuous there and reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizationBound {
    pub value: f64,
    pub clamped: bool,
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// sqrt of [K * sum_j ln(M_j (M_j - 1) / 2) - ln K! + ln(1/delta)] / (2m).
///
/// The model-counting term is computed by exact summation of logs. A negative
/// radicand (possible when K! dominates tiny grids) is clamped to 0.
pub fn generalization_bound(inputs: &BoundInputs) -> Result<GeneralizationBound> {
    inputs.validate()?;
    let log_boxes: f64 = inputs
        .grid_sizes
        .iter()
        .map(|&mj| {
            let mj = mj as f64;
            (mj * (mj - 1.0) / 2.0).ln()
        })
        .sum();
    let term = inputs.k as f64 * log_boxes - ln_factorial(inputs.k) + (1.0 / inputs.delta).ln();
    let clamped = term < 0.0;
    let term = term.max(0.0);
    Ok(GeneralizationBound {
        value: (term / (2.0 * inputs.m as f64)).sqrt(),
        clamped,
    })
}

/// The training objective with no regularization: covered positives plus
/// `c_i` times the excluded negatives. A gain, not an average.
pub fn empirical_risk(model: &BoxModel, data: &Dataset, c_i: f64) -> Result<f64> {
    let mut positives_covered = 0usize;
    let mut negatives_excluded = 0usize;
    for (x, &label) in data.rows().zip(data.labels()) {
        let predicted_positive = model.predict(x)?.is_positive();
        if label.is_positive() && predicted_positive {
            positives_covered += 1;
        } else if !label.is_positive() && !predicted_positive {
            negatives_excluded += 1;
        }
    }
    Ok(positives_covered as f64 + c_i * negatives_excluded as f64)
}

/// Definitional identity used by callers that already have the regularized
/// objective: the empirical risk equals it at c_e = 0.
pub fn empirical_risk_matches_objective(
    model: &BoxModel,
    data: &Dataset,
    c_i: f64,
) -> Result<bool> {
    Ok(empirical_risk(model, data, c_i)? == objective_value(model, data, c_i, 0.0)?)
}
