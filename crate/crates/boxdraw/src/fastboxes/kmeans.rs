//! Basic k-means with Euclidean distance, seeded random-partition
//! initialization, and restart selection by within-cluster SSE.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Clustering of a point set into `k` nonempty clusters.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    /// Cluster index in [0, k) for each input point.
    pub assignments: Vec<usize>,
    /// k centers, coordinate-wise means of their members.
    pub centers: Vec<Vec<f64>>,
    /// Sum over points of squared Euclidean distance to the assigned center.
    pub within_cluster_sse: f64,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centers_of(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let n = points[0].len();
    let mut sums = vec![vec![0.0; n]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (sum, v) in sums[c].iter_mut().zip(p) {
            *sum += v;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(&counts) {
        if count > 0 {
            for v in sum.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    sums
}

fn sse_of(points: &[Vec<f64>], assignments: &[usize], centers: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| dist_sq(p, &centers[c]))
        .sum()
}

/// Moves points into empty clusters until none remain. The donor is the
/// point farthest from its current center among clusters that can spare one;
/// ties break on the lowest point index.
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &c in assignments.iter() {
            counts[c] += 1;
        }
        let Some(empty) = (0..k).find(|&c| counts[c] == 0) else {
            return;
        };
        let centers = centers_of(points, assignments, k);
        let mut donor = None;
        let mut best = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            if counts[assignments[i]] < 2 {
                continue;
            }
            let d = dist_sq(p, &centers[assignments[i]]);
            if d > best {
                best = d;
                donor = Some(i);
            }
        }
        let donor = donor.expect("p >= k guarantees a donor cluster exists");
        assignments[donor] = empty;
    }
}

fn lloyd(
    points: &[Vec<f64>],
    mut assignments: Vec<usize>,
    k: usize,
    max_iter: usize,
) -> ClusterResult {
    repair_empty(points, &mut assignments, k);
    let mut centers = centers_of(points, &assignments, k);
    for _ in 0..max_iter {
        let mut next: Vec<usize> = points
            .iter()
            .map(|p| {
                let mut best = 0;
                let mut best_d = dist_sq(p, &centers[0]);
                for (c, center) in centers.iter().enumerate().skip(1) {
                    let d = dist_sq(p, center);
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                best
            })
            .collect();
        repair_empty(points, &mut next, k);
        let converged = next == assignments;
        assignments = next;
        centers = centers_of(points, &assignments, k);
        if converged {
            break;
        }
    }
    let within_cluster_sse = sse_of(points, &assignments, &centers);
    ClusterResult {
        assignments,
        centers,
        within_cluster_sse,
    }
}

/// Runs `restarts` seeded random-partition initializations of Lloyd's
/// algorithm and returns the result with the lowest within-cluster SSE.
/// Deterministic given the seed.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<ClusterResult> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".to_string()));
    }
    if points.len() < k {
        return Err(Error::Precondition(format!(
            "k-means needs at least k = {k} points, got {}",
            points.len()
        )));
    }
    let restarts = restarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ClusterResult> = None;
    for _ in 0..restarts {
        let assignments: Vec<usize> = (0..points.len()).map(|_| rng.random_range(0..k)).collect();
        let result = lloyd(points, assignments, k, max_iter);
        if best
            .as_ref()
            .is_none_or(|b| result.within_cluster_sse < b.within_cluster_sse)
        {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart runs"))
}
