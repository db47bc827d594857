//! Per-boundary machinery of the fast trainer: tight starting boxes, the
//! dividing-space point sets, the exponential-loss sums, the closed-form
//! boundary solutions, and the final expansion toward the nearest negative.

use crate::error::{Error, Result};
use crate::model::AxisBox;
use crate::Dataset;

use super::kmeans::ClusterResult;

/// The four loss sums feeding one (dimension, box) boundary pair.
///
/// Whenever the positive side is nonempty, `r_plus_*` is at least exp(-1):
/// the extreme cluster point sits exactly on the starting boundary and
/// contributes exp(-(0 + 1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySums {
    pub r_plus_lower: f64,
    pub r_minus_lower: f64,
    pub r_plus_upper: f64,
    pub r_minus_upper: f64,
}

/// Smallest enclosing axis-parallel rectangle of each cluster: coordinate-wise
/// min and max over the cluster's points, so every cluster point is contained
/// inclusively.
pub fn tight_boxes(points: &[Vec<f64>], clusters: &ClusterResult) -> Vec<AxisBox> {
    let k = clusters.centers.len();
    let n = points[0].len();
    let mut lower = vec![vec![f64::INFINITY; n]; k];
    let mut upper = vec![vec![f64::NEG_INFINITY; n]; k];
    for (p, &c) in points.iter().zip(&clusters.assignments) {
        for j in 0..n {
            lower[c][j] = lower[c][j].min(p[j]);
            upper[c][j] = upper[c][j].max(p[j]);
        }
    }
    lower
        .into_iter()
        .zip(upper)
        .map(|(lo, hi)| AxisBox::new(lo, hi).expect("tight box has lower <= upper"))
        .collect()
}

fn inside_other_dims(x: &[f64], b: &AxisBox, j: usize) -> bool {
    (0..x.len()).all(|p| p == j || (b.lower()[p] <= x[p] && x[p] <= b.upper()[p]))
}

/// Splits the dataset into the index sets that influence the lower and upper
/// boundary of dimension `j` of the starting box.
///
/// The lower set holds every point with `x_j` at or below the lower boundary,
/// plus points in the lower half of the box slab that lie inside the box in
/// all other dimensions; the upper set mirrors it. A point exactly on the
/// midline that is inside the box in the other dimensions lands in both sets.
pub fn divide_space(data: &Dataset, b: &AxisBox, j: usize) -> (Vec<usize>, Vec<usize>) {
    let lo = b.lower()[j];
    let hi = b.upper()[j];
    let mid = (lo + hi) / 2.0;
    let mut lower_set = Vec::new();
    let mut upper_set = Vec::new();
    for (i, x) in data.rows().enumerate() {
        let v = x[j];
        if v <= lo || (v <= mid && lo <= v && inside_other_dims(x, b, j)) {
            lower_set.push(i);
        }
        if v >= hi || (v >= mid && v <= hi && inside_other_dims(x, b, j)) {
            upper_set.push(i);
        }
    }
    (lower_set, upper_set)
}

fn hinge_distance(x: &[f64], b: &AxisBox, j: usize) -> f64 {
    (0..x.len())
        .filter(|&p| p != j)
        .map(|p| (x[p] - b.upper()[p]).max(0.0) + (b.lower()[p] - x[p]).max(0.0))
        .sum()
}

/// Accumulates the four exponential-loss sums for dimension `j` of one box.
///
/// `pos_mask` marks the rows of the box's own cluster positives and
/// `neg_mask` the rows acting as the opposing class; points outside the
/// dividing-space sets contribute nothing. Opposing points that sit
/// diagonally off the box corners count their extra distance in the other
/// dimensions against their weight, so only points directly opposite an edge
/// push back with full force. Summation follows dataset order so the result
/// is independent of scheduling.
pub fn boundary_sums(
    data: &Dataset,
    b: &AxisBox,
    j: usize,
    lower_set: &[usize],
    upper_set: &[usize],
    pos_mask: &[bool],
    neg_mask: &[bool],
) -> BoundarySums {
    let lo = b.lower()[j];
    let hi = b.upper()[j];
    let mut sums = BoundarySums {
        r_plus_lower: 0.0,
        r_minus_lower: 0.0,
        r_plus_upper: 0.0,
        r_minus_upper: 0.0,
    };
    for &i in lower_set {
        let x = data.row(i);
        if pos_mask[i] {
            sums.r_plus_lower += (-(x[j] - lo + 1.0)).exp();
        } else if neg_mask[i] {
            sums.r_minus_lower += (x[j] - lo + 1.0 - hinge_distance(x, b, j)).exp();
        }
    }
    for &i in upper_set {
        let x = data.row(i);
        if pos_mask[i] {
            sums.r_plus_upper += (-(hi - x[j] + 1.0)).exp();
        } else if neg_mask[i] {
            sums.r_minus_upper += (hi - x[j] + 1.0 - hinge_distance(x, b, j)).exp();
        }
    }
    sums
}

/// Closed-form minimizer for a lower boundary.
///
/// With opposition present the revised boundary is
/// `l_s - 1 + ln((-beta + sqrt(beta^2 + 4 c r_plus r_minus)) / (2 r_plus))`,
/// evaluated in a cancellation-free arrangement. When `r_minus` falls at or
/// below the threshold there is nothing to discriminate against and the
/// boundary disappears (negative infinity).
pub fn solve_lower(
    l_s: f64,
    r_plus: f64,
    r_minus: f64,
    c: f64,
    beta: f64,
    r_minus_threshold: f64,
) -> Result<f64> {
    if r_plus <= 0.0 {
        return Err(Error::Precondition(
            "solve_lower requires r_plus > 0 when the positive side is nonempty".to_string(),
        ));
    }
    if r_minus <= r_minus_threshold {
        return Ok(f64::NEG_INFINITY);
    }
    let a = c * r_plus * r_minus;
    let t = 2.0 * c * r_minus / (beta + (beta * beta + 4.0 * a).sqrt());
    Ok(l_s - 1.0 + t.ln())
}

/// Closed-form minimizer for an upper boundary; mirror image of
/// [`solve_lower`] with the boundary vanishing to positive infinity.
pub fn solve_upper(
    u_s: f64,
    r_plus: f64,
    r_minus: f64,
    c: f64,
    beta: f64,
    r_minus_threshold: f64,
) -> Result<f64> {
    if r_plus <= 0.0 {
        return Err(Error::Precondition(
            "solve_upper requires r_plus > 0 when the positive side is nonempty".to_string(),
        ));
    }
    if r_minus <= r_minus_threshold {
        return Ok(f64::INFINITY);
    }
    let a = c * r_plus * r_minus;
    let s = (beta + (beta * beta + 4.0 * a).sqrt()) / (2.0 * c * r_minus);
    Ok(u_s + 1.0 + s.ln())
}

/// Expands each boundary out to within `epsilon` of the nearest negative,
/// never letting the box contract.
///
/// The raw lower value is the supremum of negative coordinates strictly below
/// `min(l_r, l_s)` plus `epsilon`, clamped back to `min(l_r, l_s)` when the
/// nearest negative is closer than `epsilon`; with no negative below, the
/// boundary disappears. The upper side mirrors this.
pub fn final_expansion(
    starting: &AxisBox,
    revised_lower: &[f64],
    revised_upper: &[f64],
    negatives: &[&[f64]],
    epsilon: f64,
) -> Result<AxisBox> {
    let n = starting.n_dims();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for j in 0..n {
        let lo_cap = revised_lower[j].min(starting.lower()[j]);
        let below = negatives
            .iter()
            .map(|x| x[j])
            .filter(|&v| v < lo_cap)
            .fold(f64::NEG_INFINITY, f64::max);
        lower.push(if below.is_finite() {
            (below + epsilon).min(lo_cap)
        } else {
            f64::NEG_INFINITY
        });

        let hi_cap = revised_upper[j].max(starting.upper()[j]);
        let above = negatives
            .iter()
            .map(|x| x[j])
            .filter(|&v| v > hi_cap)
            .fold(f64::INFINITY, f64::min);
        upper.push(if above.is_finite() {
            (above - epsilon).max(hi_cap)
        } else {
            f64::INFINITY
        });
    }
    AxisBox::new(lower, upper)
}
