//! The fast characterize-then-discriminate trainer.
//!
//! Training clusters the minority class, wraps each cluster in its smallest
//! enclosing box, then treats every boundary of every box as an independent
//! one-dimensional classifier: the points that influence the boundary are
//! selected by the dividing-space rule, a regularized exponential loss is
//! minimized in closed form, and a final expansion pushes each boundary out
//! to just short of the nearest negative so the box never contracts.

mod boundary;
mod kmeans;

pub use boundary::{
    boundary_sums, divide_space, final_expansion, solve_lower, solve_upper, tight_boxes,
    BoundarySums,
};
pub use kmeans::{kmeans, ClusterResult};

use serde::{Deserialize, Serialize};

use crate::data::{normalize, Dataset, NormParams};
use crate::error::{Error, Result};
use crate::eval::{convex_hull_auh, cost_sweep, stratified_kfold};
use crate::model::{denormalize_model, AxisBox, BoxModel, Units};

/// Which examples act as the opposing class when a boundary is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeScope {
    /// Majority-class examples only (default).
    MajorityOnly,
    /// Every example outside the box's own cluster, including positives that
    /// belong to other clusters.
    AllOutOfCluster,
}

/// Hyperparameters of the fast trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastBoxesConfig {
    /// Number of clusters / boxes.
    pub k: usize,
    /// Majority-class weight in the exponential loss, in (0, 1].
    pub c: f64,
    /// Expansion regularizer; larger values push boundaries outward.
    pub beta: f64,
    /// Gap kept between an expanded boundary and the nearest negative.
    pub epsilon_expand: f64,
    /// Below this, the opposing sum counts as zero and the boundary
    /// disappears.
    pub r_minus_threshold: f64,
    pub kmeans_seed: u64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub negatives_for_discrimination: NegativeScope,
}

impl Default for FastBoxesConfig {
    fn default() -> Self {
        Self {
            k: 1,
            c: 0.5,
            beta: 0.1,
            epsilon_expand: 0.01,
            r_minus_threshold: 1e-8,
            kmeans_seed: 0,
            kmeans_restarts: 10,
            kmeans_max_iter: 100,
            negatives_for_discrimination: NegativeScope::MajorityOnly,
        }
    }
}

impl FastBoxesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".to_string()));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "c must be in (0, 1], got {}",
                self.c
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be a finite value >= 0, got {}",
                self.beta
            )));
        }
        if self.epsilon_expand.is_nan() || self.epsilon_expand <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon_expand must be > 0, got {}",
                self.epsilon_expand
            )));
        }
        if self.r_minus_threshold.is_nan() || self.r_minus_threshold <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "r_minus_threshold must be > 0, got {}",
                self.r_minus_threshold
            )));
        }
        if self.kmeans_restarts < 1 || self.kmeans_max_iter < 1 {
            return Err(Error::InvalidConfig(
                "kmeans_restarts and kmeans_max_iter must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Which side of a box a trace row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One boundary decision, recorded for debugging.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub cluster: usize,
    pub dim: usize,
    pub side: Side,
    /// Starting boundary (normalized units).
    pub start: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// Closed-form revised boundary.
    pub revised: f64,
    /// Boundary after the final expansion.
    pub final_value: f64,
}

/// Renders traces as CSV with header `k,j,side,start,r_plus,r_minus,revised,final`.
pub fn traces_to_csv(traces: &[BoundaryTrace]) -> String {
    let mut out = String::from("k,j,side,start,r_plus,r_minus,revised,final\n");
    for t in traces {
        let side = match t.side {
            Side::Lower => "lower",
            Side::Upper => "upper",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            t.cluster, t.dim, side, t.start, t.r_plus, t.r_minus, t.revised, t.final_value
        ));
    }
    out
}

/// The three boundary stages of every box, in normalized units. Revised
/// boundaries are the raw closed-form output and may cross; the final stage
/// restores order because it never contracts past the starting box.
#[derive(Debug, Clone)]
pub struct StagedBoxes {
    pub starting: Vec<AxisBox>,
    pub revised_lower: Vec<Vec<f64>>,
    pub revised_upper: Vec<Vec<f64>>,
    pub final_boxes: Vec<AxisBox>,
}

/// Everything the trainer computed besides the model itself.
#[derive(Debug, Clone)]
pub struct TrainingDetail {
    pub clusters: ClusterResult,
    pub staged: StagedBoxes,
    pub traces: Vec<BoundaryTrace>,
    pub norm: NormParams,
}

/// Trains a box model and returns it in original units.
pub fn train_fast_boxes(data: &Dataset, config: &FastBoxesConfig) -> Result<BoxModel> {
    train_fast_boxes_detailed(data, config).map(|(model, _)| model)
}

/// [`train_fast_boxes`] plus the per-stage boundaries and trace log.
pub fn train_fast_boxes_detailed(
    data: &Dataset,
    config: &FastBoxesConfig,
) -> Result<(BoxModel, TrainingDetail)> {
    config.validate()?;
    let n_pos = data.count_positives();
    if n_pos < config.k {
        return Err(Error::Precondition(format!(
            "training needs at least k = {} positive examples, got {n_pos}",
            config.k
        )));
    }
    if data.count_negatives() < 1 {
        return Err(Error::Precondition(
            "training needs at least one negative example".to_string(),
        ));
    }

    let (ndata, norm) = normalize(data)?;
    let n = ndata.n_features();
    let positive_rows = ndata.positive_rows();
    let positive_points: Vec<Vec<f64>> = positive_rows
        .iter()
        .map(|&i| ndata.row(i).to_vec())
        .collect();
    let clusters = kmeans(
        &positive_points,
        config.k,
        config.kmeans_seed,
        config.kmeans_restarts,
        config.kmeans_max_iter,
    )?;
    let starting = tight_boxes(&positive_points, &clusters);

    let majority_mask: Vec<bool> = ndata.labels().iter().map(|l| !l.is_positive()).collect();
    let negatives: Vec<&[f64]> = ndata
        .negative_rows()
        .into_iter()
        .map(|i| ndata.row(i))
        .collect();

    let mut revised_lower = vec![vec![0.0; n]; config.k];
    let mut revised_upper = vec![vec![0.0; n]; config.k];
    let mut final_boxes = Vec::with_capacity(config.k);
    let mut traces = Vec::with_capacity(2 * n * config.k);

    for k in 0..config.k {
        let mut pos_mask = vec![false; ndata.len()];
        for (&row, &cluster) in positive_rows.iter().zip(&clusters.assignments) {
            if cluster == k {
                pos_mask[row] = true;
            }
        }
        let neg_mask: Vec<bool> = match config.negatives_for_discrimination {
            NegativeScope::MajorityOnly => majority_mask.clone(),
            NegativeScope::AllOutOfCluster => (0..ndata.len())
                .map(|i| majority_mask[i] || (!pos_mask[i] && ndata.label(i).is_positive()))
                .collect(),
        };

        for j in 0..n {
            let (lower_set, upper_set) = divide_space(&ndata, &starting[k], j);
            let sums = boundary_sums(
                &ndata,
                &starting[k],
                j,
                &lower_set,
                &upper_set,
                &pos_mask,
                &neg_mask,
            );
            let l_s = starting[k].lower()[j];
            let u_s = starting[k].upper()[j];
            let l_r = solve_lower(
                l_s,
                sums.r_plus_lower,
                sums.r_minus_lower,
                config.c,
                config.beta,
                config.r_minus_threshold,
            )?;
            let u_r = solve_upper(
                u_s,
                sums.r_plus_upper,
                sums.r_minus_upper,
                config.c,
                config.beta,
                config.r_minus_threshold,
            )?;
            revised_lower[k][j] = l_r;
            revised_upper[k][j] = u_r;
            traces.push(BoundaryTrace {
                cluster: k,
                dim: j,
                side: Side::Lower,
                start: l_s,
                r_plus: sums.r_plus_lower,
                r_minus: sums.r_minus_lower,
                revised: l_r,
                final_value: f64::NAN,
            });
            traces.push(BoundaryTrace {
                cluster: k,
                dim: j,
                side: Side::Upper,
                start: u_s,
                r_plus: sums.r_plus_upper,
                r_minus: sums.r_minus_upper,
                revised: u_r,
                final_value: f64::NAN,
            });
        }

        let final_box = final_expansion(
            &starting[k],
            &revised_lower[k],
            &revised_upper[k],
            &negatives,
            config.epsilon_expand,
        )?;
        for j in 0..n {
            let base = traces.len() - 2 * n;
            traces[base + 2 * j].final_value = final_box.lower()[j];
            traces[base + 2 * j + 1].final_value = final_box.upper()[j];
        }
        final_boxes.push(final_box);
    }

    let normalized_model = BoxModel::new(
        final_boxes.clone(),
        Some(norm.clone()),
        Units::Normalized,
        ndata.feature_names().to_vec(),
    )?;
    let model = denormalize_model(&normalized_model, &norm)?;
    let detail = TrainingDetail {
        clusters,
        staged: StagedBoxes {
            starting,
            revised_lower,
            revised_upper,
            final_boxes,
        },
        traces,
        norm,
    };
    Ok((model, detail))
}

/// Mean validation AUH of one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct GridScore {
    pub k: usize,
    pub beta: f64,
    pub mean_auh: f64,
}

/// Outcome of [`select_hyperparameters`].
#[derive(Debug, Clone)]
pub struct Selection {
    pub config: FastBoxesConfig,
    pub scores: Vec<GridScore>,
}

/// Default (k, beta) search grid: k in 1..=5 crossed with
/// beta in {0, 0.01, 0.1, 0.5, 1}.
pub fn default_grid() -> Vec<(usize, f64)> {
    let betas = [0.0, 0.01, 0.1, 0.5, 1.0];
    (1..=5)
        .flat_map(|k| betas.iter().map(move |&b| (k, b)))
        .collect()
}

/// Selects (k, beta) by cross-validated mean AUH over the cost sweep.
///
/// Every grid point is scored with a `folds`-fold stratified split; ties go
/// to the smaller k, then the smaller beta. Grid points that cannot be
/// trained on some fold (for example k exceeding a fold's positive count)
/// are skipped.
pub fn select_hyperparameters(
    data: &Dataset,
    base: &FastBoxesConfig,
    grid: &[(usize, f64)],
    folds: usize,
    costs: &[f64],
    seed: u64,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(
            "hyperparameter grid is empty".to_string(),
        ));
    }
    let splits = stratified_kfold(data, folds, seed)?;
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, usize, f64)> = None;
    for &(k, beta) in grid {
        let mut config = base.clone();
        config.k = k;
        config.beta = beta;
        let mut total = 0.0;
        let mut feasible = true;
        for split in &splits {
            let train = data.subset(&split.train);
            let test = data.subset(&split.test);
            let trainer = |d: &Dataset, cost: f64| {
                let mut c = config.clone();
                c.c = cost;
                train_fast_boxes(d, &c)
            };
            match cost_sweep(&trainer, &train, &test, costs) {
                Ok(points) => {
                    let auh =
                        convex_hull_auh(&points, test.count_positives(), test.count_negatives())?;
                    total += auh.auh;
                }
                Err(Error::Precondition(_)) => {
                    feasible = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let mean_auh = if feasible {
            total / splits.len() as f64
        } else {
            f64::NEG_INFINITY
        };
        scores.push(GridScore { k, beta, mean_auh });
        let better = match best {
            None => feasible,
            Some((best_score, best_k, best_beta)) => {
                mean_auh > best_score || (mean_auh == best_score && (k, beta) < (best_k, best_beta))
            }
        };
        if better {
            best = Some((mean_auh, k, beta));
        }
    }
    let (_, k, beta) = best.ok_or_else(|| {
        Error::Precondition("no grid point could be trained on every fold".to_string())
    })?;
    let mut config = base.clone();
    config.k = k;
    config.beta = beta;
    Ok(Selection { config, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        let n = rows[0].len();
        let names = (0..n).map(|j| format!("x{}", j + 1)).collect();
        Dataset::new(rows, labels, names).unwrap()
    }

    /// Positives on a small grid inside [0.4, 0.6]^2, negatives on a coarse
    /// grid everywhere else.
    fn separable_square() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                rows.push(vec![0.45 + 0.05 * a as f64, 0.45 + 0.05 * b as f64]);
                labels.push(Label::Pos);
            }
        }
        let mut v = -1.0;
        while v <= 1.001 {
            let mut w = -1.0;
            while w <= 1.001 {
                if !(0.4..=0.6).contains(&v) || !(0.4..=0.6).contains(&w) {
                    rows.push(vec![v, w]);
                    labels.push(Label::Neg);
                }
                w += 0.25;
            }
            v += 0.25;
        }
        dataset(rows, labels)
    }

    #[test]
    fn recovers_a_separable_square() {
        let data = separable_square();
        let config = FastBoxesConfig {
            k: 1,
            c: 1.0,
            beta: 0.0,
            ..FastBoxesConfig::default()
        };
        let model = train_fast_boxes(&data, &config).unwrap();
        assert_eq!(model.num_boxes(), 1);
        assert_eq!(model.units(), Units::Original);
        for (x, &label) in data.rows().zip(data.labels()) {
            assert_eq!(model.predict(x).unwrap(), label, "misclassified {x:?}");
        }
    }

    #[test]
    fn one_box_per_isolated_positive_covers_them_all() {
        let rows = vec![
            vec![-0.8, -0.8],
            vec![0.8, -0.6],
            vec![0.0, 0.9],
            vec![-0.5, 0.5],
            vec![-0.1, -0.1],
            vec![0.4, 0.3],
        ];
        let labels = vec![
            Label::Pos,
            Label::Pos,
            Label::Pos,
            Label::Neg,
            Label::Neg,
            Label::Neg,
        ];
        let data = dataset(rows, labels);
        let config = FastBoxesConfig {
            k: 3,
            ..FastBoxesConfig::default()
        };
        let model = train_fast_boxes(&data, &config).unwrap();
        for (x, &label) in data.rows().zip(data.labels()) {
            if label == Label::Pos {
                assert_eq!(model.predict(x).unwrap(), Label::Pos);
            }
        }
    }

    #[test]
    fn expansion_never_contracts_the_starting_box() {
        let data = separable_square();
        let config = FastBoxesConfig {
            k: 2,
            c: 0.3,
            beta: 0.5,
            ..FastBoxesConfig::default()
        };
        let (_, detail) = train_fast_boxes_detailed(&data, &config).unwrap();
        for k in 0..config.k {
            let s = &detail.staged.starting[k];
            let f = &detail.staged.final_boxes[k];
            for j in 0..s.n_dims() {
                assert!(f.lower()[j] <= s.lower()[j]);
                assert!(f.upper()[j] >= s.upper()[j]);
            }
        }
    }

    #[test]
    fn rejects_too_few_positives() {
        let data = dataset(vec![vec![0.0], vec![1.0]], vec![Label::Pos, Label::Neg]);
        let config = FastBoxesConfig {
            k: 2,
            ..FastBoxesConfig::default()
        };
        assert!(matches!(
            train_fast_boxes(&data, &config),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rejects_missing_negatives() {
        let data = dataset(vec![vec![0.0], vec![1.0]], vec![Label::Pos, Label::Pos]);
        let config = FastBoxesConfig::default();
        assert!(train_fast_boxes(&data, &config).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let data = separable_square();
        let config = FastBoxesConfig {
            k: 3,
            c: 0.4,
            ..FastBoxesConfig::default()
        };
        let a = train_fast_boxes(&data, &config).unwrap();
        let b = train_fast_boxes(&data, &config).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn trace_log_covers_every_boundary() {
        let data = separable_square();
        let config = FastBoxesConfig {
            k: 2,
            ..FastBoxesConfig::default()
        };
        let (_, detail) = train_fast_boxes_detailed(&data, &config).unwrap();
        assert_eq!(detail.traces.len(), 2 * 2 * 2);
        let csv = traces_to_csv(&detail.traces);
        assert!(csv.starts_with("k,j,side,start,r_plus,r_minus,revised,final\n"));
        assert_eq!(csv.lines().count(), 1 + detail.traces.len());
    }

    #[test]
    fn config_deserializes_from_partial_json() {
        let config: FastBoxesConfig =
            serde_json::from_str(r#"{"k": 3, "c": 0.2, "negatives_for_discrimination": "all_out_of_cluster"}"#)
                .unwrap();
        assert_eq!(config.k, 3);
        assert_eq!(config.c, 0.2);
        assert_eq!(
            config.negatives_for_discrimination,
            NegativeScope::AllOutOfCluster
        );
        // Unspecified fields fall back to the defaults.
        assert_eq!(config.kmeans_restarts, 10);
    }

    #[test]
    fn selection_singleton_grid_returns_it() {
        let data = separable_square();
        let base = FastBoxesConfig::default();
        let sel = select_hyperparameters(&data, &base, &[(1, 0.25)], 3, &[0.5, 1.0], 9).unwrap();
        assert_eq!(sel.config.k, 1);
        assert_eq!(sel.config.beta, 0.25);
    }

    #[test]
    fn selection_breaks_ties_by_grid_order() {
        let data = separable_square();
        let base = FastBoxesConfig::default();
        let sel =
            select_hyperparameters(&data, &base, &[(2, 0.1), (2, 0.1), (1, 0.1)], 3, &[1.0], 9)
                .unwrap();
        // Identical scores: the smallest k wins regardless of grid position.
        assert_eq!(sel.scores.len(), 3);
        if sel.scores[0].mean_auh == sel.scores[2].mean_auh {
            assert_eq!(sel.config.k, 1);
        }
    }
}
