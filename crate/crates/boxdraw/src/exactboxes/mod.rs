//! The exact trainer: a mixed-integer programming formulation of the best
//! possible box drawing, LP-text export for external solvers, and a built-in
//! exact solver for desk-scale instances based on the finite candidate-
//! boundary grid, plus the scaling heuristics (neighborhood filtering and
//! per-cluster decomposition).

mod heuristics;
mod mip;
mod solver;

pub use heuristics::{cluster_decompose_mip, neighborhood_filter, FilterMode};
pub use mip::{
    build_mip, check_feasibility, emit_lp, lift_assignment, lp_string, model_from_assignment,
    Assignment, LinearConstraint, MipModel, Sense, VarKind, Variable, Violation,
};
pub use solver::{candidate_grid, solve_exact_small, ExactSolution, Optimality};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::BoxModel;

/// Hyperparameters of the exact trainer and its MIP formulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactBoxesConfig {
    /// Number of boxes K.
    pub k: usize,
    /// Majority-class weight c_I in (0, 1].
    pub c_i: f64,
    /// Per-box regularization penalty c_e.
    pub c_e: f64,
    /// Margin v required between a point and a box boundary.
    pub margin: f64,
    /// Big-M constant of the indicator linearization; must exceed the data
    /// diameter plus the margin.
    pub big_m: f64,
    /// Small constant standing in for strict inequalities.
    pub eps_strict: f64,
}

impl Default for ExactBoxesConfig {
    fn default() -> Self {
        Self {
            k: 1,
            c_i: 0.5,
            c_e: 0.0,
            margin: 1e-4,
            big_m: 4.0,
            eps_strict: 1e-6,
        }
    }
}

impl ExactBoxesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".to_string()));
        }
        if !(self.c_i > 0.0 && self.c_i <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "c_i must be in (0, 1], got {}",
                self.c_i
            )));
        }
        if self.c_e.is_nan() || self.c_e < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "c_e must be >= 0, got {}",
                self.c_e
            )));
        }
        if self.margin.is_nan() || self.margin < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "margin must be >= 0, got {}",
                self.margin
            )));
        }
        if self.eps_strict.is_nan() || self.eps_strict <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "eps_strict must be > 0, got {}",
                self.eps_strict
            )));
        }
        if self.big_m.is_nan() || self.big_m <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "big_m must be > 0, got {}",
                self.big_m
            )));
        }
        Ok(())
    }
}

/// The training objective: covered positives, plus `c_i` per excluded
/// negative, minus `c_e` per box.
pub fn objective_value(model: &BoxModel, data: &Dataset, c_i: f64, c_e: f64) -> Result<f64> {
    if model.feature_names() != data.feature_names() {
        let name = model
            .feature_names()
            .iter()
            .find(|n| !data.feature_names().contains(n))
            .cloned()
            .unwrap_or_else(|| "feature count".to_string());
        return Err(Error::FeatureMismatch { name });
    }
    let predictions = model.predict_all(data)?;
    let mut tp = 0usize;
    let mut tn = 0usize;
    for (&label, &pred) in data.labels().iter().zip(&predictions) {
        if label.is_positive() && pred.is_positive() {
            tp += 1;
        } else if !label.is_positive() && !pred.is_positive() {
            tn += 1;
        }
    }
    Ok(tp as f64 + c_i * tn as f64 - c_e * model.num_boxes() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;
    use crate::model::{AxisBox, Units};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|j| format!("x{}", j + 1)).collect()
    }

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        let n = rows[0].len();
        Dataset::new(rows, labels, names(n)).unwrap()
    }

    #[test]
    fn objective_of_perfect_and_trivial_models() {
        let rows = vec![
            vec![0.1],
            vec![0.2],
            vec![0.3],
            vec![0.6],
            vec![0.7],
            vec![0.8],
            vec![0.9],
            vec![1.0],
        ];
        let labels = vec![
            Label::Pos,
            Label::Pos,
            Label::Pos,
            Label::Neg,
            Label::Neg,
            Label::Neg,
            Label::Neg,
            Label::Neg,
        ];
        let data = dataset(rows, labels);
        let perfect = BoxModel::new(
            vec![AxisBox::new(vec![0.0], vec![0.4]).unwrap()],
            None,
            Units::Original,
            names(1),
        )
        .unwrap();
        assert_eq!(objective_value(&perfect, &data, 0.5, 0.0).unwrap(), 5.5);
        let trivial = BoxModel::trivial_negative(names(1));
        assert_eq!(objective_value(&trivial, &data, 0.5, 0.0).unwrap(), 2.5);
        // The per-box penalty subtracts c_e per box.
        assert_eq!(objective_value(&perfect, &data, 0.5, 0.25).unwrap(), 5.25);
    }

    #[test]
    fn objective_matches_a_brute_force_recount() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64 * 0.37) % 2.0 - 1.0, (i as f64 * 0.73) % 2.0 - 1.0])
            .collect();
        let labels: Vec<Label> = (0..20)
            .map(|i| if i % 3 == 0 { Label::Pos } else { Label::Neg })
            .collect();
        let data = dataset(rows, labels);
        let model = BoxModel::new(
            vec![AxisBox::new(vec![-0.5, -0.5], vec![0.5, 0.5]).unwrap()],
            None,
            Units::Original,
            names(2),
        )
        .unwrap();
        let (c_i, c_e) = (0.35, 0.1);
        let mut expected = -c_e;
        for (x, &label) in data.rows().zip(data.labels()) {
            let inside = (-0.5..=0.5).contains(&x[0]) && (-0.5..=0.5).contains(&x[1]);
            if label == Label::Pos && inside {
                expected += 1.0;
            }
            if label == Label::Neg && !inside {
                expected += c_i;
            }
        }
        let got = objective_value(&model, &data, c_i, c_e).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_mismatched_features() {
        let data = dataset(vec![vec![0.0]], vec![Label::Pos]);
        let model = BoxModel::trivial_negative(vec!["other".to_string()]);
        assert!(matches!(
            objective_value(&model, &data, 0.5, 0.0),
            Err(Error::FeatureMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ExactBoxesConfig::default().validate().is_ok());
        let bad = ExactBoxesConfig {
            c_i: 1.5,
            ..ExactBoxesConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExactBoxesConfig {
            k: 0,
            ..ExactBoxesConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
