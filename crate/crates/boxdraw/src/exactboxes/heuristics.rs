//! Scaling heuristics: restrict the exact solver to a neighborhood of the
//! positive data, or decompose the problem into one single-box solve per
//! positive cluster.

use crate::data::{normalize, Dataset};
use crate::error::{Error, Result};
use crate::fastboxes::kmeans;
use crate::model::{denormalize_model, AxisBox, BoxModel, Units};

use super::solver::{candidate_grid, solve_exact_small};
use super::ExactBoxesConfig;

/// How a negative qualifies as "near" the positive bounding intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Keep a negative if it is within tau of the positive interval in at
    /// least one dimension (default).
    AnyDimension,
    /// Keep a negative only if it is within tau in every dimension.
    AllDimensions,
}

/// Keeps all positives and the negatives near them, in one pass.
///
/// Nearness compares, per dimension, the distance from the negative's
/// coordinate to the interval spanned by the positives against `tau[j]`.
/// Row order is preserved.
pub fn neighborhood_filter(data: &Dataset, tau: &[f64], mode: FilterMode) -> Result<Dataset> {
    let n = data.n_features();
    if tau.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: tau.len(),
        });
    }
    if tau.iter().any(|&t| t < 0.0 || t.is_nan()) {
        return Err(Error::InvalidConfig(
            "tau entries must be nonnegative".to_string(),
        ));
    }
    let positives = data.positive_rows();
    if positives.is_empty() {
        return Err(Error::Precondition(
            "neighborhood filtering needs at least one positive example".to_string(),
        ));
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for &i in &positives {
        for j in 0..n {
            lo[j] = lo[j].min(data.row(i)[j]);
            hi[j] = hi[j].max(data.row(i)[j]);
        }
    }
    let keep: Vec<usize> = (0..data.len())
        .filter(|&i| {
            if data.label(i).is_positive() {
                return true;
            }
            let x = data.row(i);
            let near = |j: usize| {
                let d = (lo[j] - x[j]).max(x[j] - hi[j]).max(0.0);
                d <= tau[j]
            };
            match mode {
                FilterMode::AnyDimension => (0..n).any(near),
                FilterMode::AllDimensions => (0..n).all(near),
            }
        })
        .collect();
    Ok(data.subset(&keep))
}

/// Clusters the positives, solves a one-box program on each cluster's
/// neighborhood, and unions the boxes. Returns a model in original units.
///
/// Per cluster, tau defaults to 10% of the cluster's positive range in each
/// dimension. A cluster whose neighborhood contains no negative gets its
/// tight box expanded to the candidate-grid extremes instead of a solve.
pub fn cluster_decompose_mip(
    data: &Dataset,
    k: usize,
    config: &ExactBoxesConfig,
    seed: u64,
    node_budget: u64,
) -> Result<BoxModel> {
    config.validate()?;
    if data.count_positives() < k || k < 1 {
        return Err(Error::Precondition(format!(
            "decomposition needs at least k = {k} positive examples, got {}",
            data.count_positives()
        )));
    }
    if data.count_negatives() < 1 {
        return Err(Error::Precondition(
            "decomposition needs at least one negative example".to_string(),
        ));
    }

    let (ndata, norm) = normalize(data)?;
    let n = ndata.n_features();
    let positive_rows = ndata.positive_rows();
    let points: Vec<Vec<f64>> = positive_rows
        .iter()
        .map(|&i| ndata.row(i).to_vec())
        .collect();
    let clusters = kmeans(&points, k, seed, 10, 100)?;

    let negative_rows = ndata.negative_rows();
    let mut boxes = Vec::new();
    for cluster in 0..k {
        let member_rows: Vec<usize> = positive_rows
            .iter()
            .zip(&clusters.assignments)
            .filter(|&(_, &a)| a == cluster)
            .map(|(&row, _)| row)
            .collect();
        let mut rows = member_rows.clone();
        rows.extend(negative_rows.iter().copied());
        rows.sort_unstable();
        let sub = ndata.subset(&rows);

        let tau: Vec<f64> = (0..n)
            .map(|j| {
                let lo = member_rows
                    .iter()
                    .map(|&i| ndata.row(i)[j])
                    .fold(f64::INFINITY, f64::min);
                let hi = member_rows
                    .iter()
                    .map(|&i| ndata.row(i)[j])
                    .fold(f64::NEG_INFINITY, f64::max);
                0.1 * (hi - lo)
            })
            .collect();
        let filtered = neighborhood_filter(&sub, &tau, FilterMode::AnyDimension)?;

        if filtered.count_negatives() == 0 {
            // Unopposed cluster: tight box widened to the grid extremes.
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            for j in 0..n {
                let grid = candidate_grid(&filtered, j)?;
                lower.push(grid[0]);
                upper.push(grid[grid.len() - 1]);
            }
            boxes.push(AxisBox::new(lower, upper)?);
            continue;
        }

        let sub_config = ExactBoxesConfig {
            k: 1,
            ..config.clone()
        };
        let solution = solve_exact_small(&filtered, &sub_config, node_budget)?;
        boxes.extend(solution.model.boxes().iter().cloned());
    }

    let normalized = BoxModel::new(
        boxes,
        Some(norm.clone()),
        Units::Normalized,
        ndata.feature_names().to_vec(),
    )?;
    denormalize_model(&normalized, &norm)
}
