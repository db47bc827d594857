//! Independent oracles shared by the integration suites: a golden-section
//! minimizer for the boundary objectives, exhaustive enumeration over the
//! full candidate-grid product for the exact solver, a pairwise-interpolation
//! hull oracle, and a seeded lattice instance generator.

#![allow(dead_code)]

use boxdraw::data::{Dataset, Label};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Golden-section search for the minimum of a unimodal function.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// The lower-boundary objective in stabilized form.
pub fn lower_objective(l: f64, l_s: f64, r_plus: f64, r_minus: f64, c: f64, beta: f64) -> f64 {
    r_plus * (l - l_s + 1.0).exp() + c * r_minus * (l_s - 1.0 - l).exp() + beta * l
}

/// The upper-boundary objective in stabilized form.
pub fn upper_objective(u: f64, u_s: f64, r_plus: f64, r_minus: f64, c: f64, beta: f64) -> f64 {
    r_plus * (u_s + 1.0 - u).exp() + c * r_minus * (u - u_s - 1.0).exp() - beta * u
}

/// A small random instance on a hundredth lattice in [-1, 1], so the minimum
/// feature gap is at least 0.01 and the default margin stays well below half
/// a gap.
pub struct RandomInstance {
    pub data: Dataset,
    pub k: usize,
    pub c_i: f64,
    pub c_e: f64,
}

pub fn random_lattice_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=2usize);
    let m = rng.random_range(6..=12usize);
    let k = rng.random_range(1..=2usize);
    let names: Vec<String> = (0..n).map(|j| format!("x{}", j + 1)).collect();
    let data = loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| rng.random_range(-100..=100i32) as f64 / 100.0)
                    .collect()
            })
            .collect();
        let labels: Vec<Label> = (0..m)
            .map(|_| {
                if rng.random_range(0..100) < 35 {
                    Label::Pos
                } else {
                    Label::Neg
                }
            })
            .collect();
        let pos = labels.iter().filter(|l| l.is_positive()).count();
        if pos >= k.max(2) && m - pos >= 2 {
            break Dataset::new(rows, labels, names.clone()).unwrap();
        }
    };
    let c_i = rng.random_range(1..=10) as f64 / 10.0;
    let c_e = [0.0, 0.1, 0.5][rng.random_range(0..3usize)];
    RandomInstance { data, k, c_i, c_e }
}

fn oracle_grid(values: &mut Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut grid = vec![values[0] - 0.5];
    for w in values.windows(2) {
        grid.push((w[0] + w[1]) / 2.0);
    }
    grid.push(values[values.len() - 1] + 0.5);
    grid
}

/// Best objective over every drawing of at most `k` boxes whose boundaries
/// come from the full candidate-grid product. Brute force; only for m <= 32,
/// n <= 2, k <= 2.
pub fn exhaustive_grid_optimum(data: &Dataset, k: usize, c_i: f64, c_e: f64) -> f64 {
    let m = data.len();
    let n = data.n_features();
    assert!(m <= 32 && n <= 2 && k <= 2, "oracle envelope exceeded");

    let mut pos_mask = 0u32;
    for i in data.positive_rows() {
        pos_mask |= 1 << i;
    }
    let neg_total = data.count_negatives() as u32;

    let interval_masks = |j: usize| -> Vec<u32> {
        let mut values: Vec<f64> = data.rows().map(|x| x[j]).collect();
        let grid = oracle_grid(&mut values);
        let mut out = Vec::new();
        for a in 0..grid.len() {
            for b in a..grid.len() {
                let (lo, hi) = (grid[a], grid[b]);
                let mut mask = 0u32;
                for (i, x) in data.rows().enumerate() {
                    if lo <= x[j] && x[j] <= hi {
                        mask |= 1 << i;
                    }
                }
                out.push(mask);
            }
        }
        out
    };

    let boxes: Vec<u32> = if n == 1 {
        interval_masks(0)
    } else {
        let d0 = interval_masks(0);
        let d1 = interval_masks(1);
        let mut out = Vec::with_capacity(d0.len() * d1.len());
        for &a in &d0 {
            for &b in &d1 {
                out.push(a & b);
            }
        }
        out
    };

    let score = |union: u32, used: usize| -> f64 {
        let tp = (union & pos_mask).count_ones();
        let fp = union.count_ones() - tp;
        let tn = neg_total - fp;
        tp as f64 + c_i * tn as f64 - c_e * used as f64
    };

    let mut best = score(0, 0);
    for &b in &boxes {
        let s = score(b, 1);
        if s > best {
            best = s;
        }
    }
    if k >= 2 {
        for i in 0..boxes.len() {
            for j in (i + 1)..boxes.len() {
                let s = score(boxes[i] | boxes[j], 2);
                if s > best {
                    best = s;
                }
            }
        }
    }
    best
}

/// Area under the upper concave envelope of the points plus anchors, built
/// from pairwise interpolation instead of a hull scan.
pub fn brute_hull_area(rate_points: &[(f64, f64)]) -> f64 {
    let mut pts = rate_points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let envelope = |x: f64| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for p in &pts {
            for q in &pts {
                if p.0 <= x && x <= q.0 {
                    let y = if q.0 == p.0 {
                        p.1.max(q.1)
                    } else {
                        p.1 + (x - p.0) * (q.1 - p.1) / (q.0 - p.0)
                    };
                    best = best.max(y);
                }
            }
        }
        best
    };
    let mut area = 0.0;
    for w in xs.windows(2) {
        area += (w[1] - w[0]) * (envelope(w[0]) + envelope(w[1])) / 2.0;
    }
    area
}

/// Path of a bundled dataset fixture.
pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}
