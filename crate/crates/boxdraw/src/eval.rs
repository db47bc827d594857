//! The evaluation protocol: cost sweeps over the class-weight parameter, the
//! area under the ROC convex hull (AUH), stratified k-fold cross-validation
//! with trivial-model accounting, and 2-D synthetic benchmark generators.

use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::BoxModel;

/// Confusion counts measured at one cost setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// The class-weight setting that produced this point.
    pub cost: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl RocPoint {
    /// True-positive rate tp / (tp + fn).
    pub fn tpr(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_) as f64
    }

    /// False-positive rate fp / (fp + tn).
    pub fn fpr(&self) -> f64 {
        self.fp as f64 / (self.fp + self.tn) as f64
    }

    /// A model is trivial on this data when it predicted a single class.
    pub fn is_trivial_prediction(&self) -> bool {
        self.tp + self.fp == 0 || self.tn + self.fn_ == 0
    }
}

/// Counts predictions of `model` on `data` against the labels. The cost field
/// is zero; sweeps fill it in.
pub fn confusion(model: &BoxModel, data: &Dataset) -> Result<RocPoint> {
    let predictions = model.predict_all(data)?;
    let mut point = RocPoint {
        cost: 0.0,
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&label, &pred) in data.labels().iter().zip(&predictions) {
        match (label, pred) {
            (Label::Pos, Label::Pos) => point.tp += 1,
            (Label::Pos, Label::Neg) => point.fn_ += 1,
            (Label::Neg, Label::Pos) => point.fp += 1,
            (Label::Neg, Label::Neg) => point.tn += 1,
        }
    }
    Ok(point)
}

/// True iff the model predicts a single class on every example of `data`.
pub fn is_trivial(model: &BoxModel, data: &Dataset) -> Result<bool> {
    let predictions = model.predict_all(data)?;
    Ok(predictions.windows(2).all(|w| w[0] == w[1]))
}

/// Anything that can train a box model at a given majority-class cost.
pub trait CostTrainer {
    fn train(&self, data: &Dataset, cost: f64) -> Result<BoxModel>;
}

impl<F> CostTrainer for F
where
    F: Fn(&Dataset, f64) -> Result<BoxModel>,
{
    fn train(&self, data: &Dataset, cost: f64) -> Result<BoxModel> {
        self(data, cost)
    }
}

/// The cost grid used throughout: 0.1, 0.2, ..., 1.0.
pub fn default_costs() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Trains one model per cost on the training split and measures each on the
/// test split.
pub fn cost_sweep(
    trainer: &impl CostTrainer,
    train: &Dataset,
    test: &Dataset,
    costs: &[f64],
) -> Result<Vec<RocPoint>> {
    if costs.is_empty() {
        return Err(Error::InvalidConfig("cost list is empty".to_string()));
    }
    for &c in costs {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "costs must lie in (0, 1], got {c}"
            )));
        }
    }
    costs
        .iter()
        .map(|&cost| {
            let model = trainer.train(train, cost)?;
            let mut point = confusion(&model, test)?;
            point.cost = cost;
            Ok(point)
        })
        .collect()
}

/// Upper convex hull of ROC points and the normalized area beneath it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuhResult {
    /// Hull vertices as (false-positive rate, true-positive rate), sorted by
    /// rate, anchors (0,0) and (1,1) included.
    pub hull: Vec<(f64, f64)>,
    /// Trapezoidal area under the hull, in [0.5, 1].
    pub auh: f64,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper convex hull and area for points already in (fpr, tpr) rate space.
/// The (0,0) and (1,1) anchors are always included.
pub fn rate_hull(rates: &[(f64, f64)]) -> AuhResult {
    let mut pts: Vec<(f64, f64)> = rates.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    pts.dedup();

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    let mut auh = 0.0;
    for w in hull.windows(2) {
        auh += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
    }
    AuhResult { hull, auh }
}

/// Maps counts to rate space, adds the (0,0) and (1,1) anchors, and computes
/// the area under the upper convex hull. Dominated and duplicate points do
/// not change the result.
pub fn convex_hull_auh(
    points: &[RocPoint],
    positives: usize,
    negatives: usize,
) -> Result<AuhResult> {
    if positives == 0 || negatives == 0 {
        return Err(Error::Precondition(
            "AUH needs at least one positive and one negative example".to_string(),
        ));
    }
    let rates: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            (
                p.fp as f64 / negatives as f64,
                p.tp as f64 / positives as f64,
            )
        })
        .collect();
    Ok(rate_hull(&rates))
}

/// One cross-validation split, both sides sorted in dataset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Class-stratified k-fold partition: each class is shuffled with the seed
/// and dealt round-robin, so per-fold class counts differ by at most one.
pub fn stratified_kfold(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "folds must be at least 2, got {folds}"
        )));
    }
    let positives = data.positive_rows();
    if positives.len() < folds {
        return Err(Error::Precondition(format!(
            "cannot stratify {} positives into {folds} folds",
            positives.len()
        )));
    }
    let negatives = data.negative_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deal = |rows: &[usize], rng: &mut ChaCha8Rng| -> Vec<Vec<usize>> {
        let mut shuffled = rows.to_vec();
        // Fisher-Yates keeps the draw count fixed, so the negative deal below
        // is unaffected by how many positives there are.
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let mut buckets = vec![Vec::new(); folds];
        for (i, row) in shuffled.into_iter().enumerate() {
            buckets[i % folds].push(row);
        }
        buckets
    };
    let pos_buckets = deal(&positives, &mut rng);
    let neg_buckets = deal(&negatives, &mut rng);

    Ok((0..folds)
        .map(|f| {
            let mut test: Vec<usize> = pos_buckets[f]
                .iter()
                .chain(neg_buckets[f].iter())
                .copied()
                .collect();
            test.sort_unstable();
            let mut train: Vec<usize> = (0..folds)
                .filter(|&g| g != f)
                .flat_map(|g| pos_buckets[g].iter().chain(neg_buckets[g].iter()).copied())
                .collect();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect())
}

/// Per-fold sweep results inside a [`CvReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub auh: f64,
    pub hull: Vec<(f64, f64)>,
    pub points: Vec<RocPoint>,
}

/// Cross-validated AUH summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub mean_auh: f64,
    /// Sample standard deviation (n - 1 denominator) of the per-fold AUH.
    pub std_auh: f64,
    /// Fraction of (fold, cost) models that predicted a single class on
    /// their test fold.
    pub trivial_fraction: f64,
    pub folds: Vec<FoldReport>,
}

impl CvReport {
    pub fn fold_auhs(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.auh).collect()
    }
}

/// Runs the full protocol: stratified folds, a cost sweep per fold, AUH per
/// fold, and the trivial-model fraction over all (fold, cost) models.
pub fn evaluate_cv(
    data: &Dataset,
    trainer: &impl CostTrainer,
    costs: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    let splits = stratified_kfold(data, folds, seed)?;
    let mut reports = Vec::with_capacity(splits.len());
    let mut trivial = 0usize;
    let mut total = 0usize;
    for (f, split) in splits.iter().enumerate() {
        let train = data.subset(&split.train);
        let test = data.subset(&split.test);
        let points = cost_sweep(trainer, &train, &test, costs)?;
        trivial += points.iter().filter(|p| p.is_trivial_prediction()).count();
        total += points.len();
        let auh = convex_hull_auh(&points, test.count_positives(), test.count_negatives())?;
        reports.push(FoldReport {
            fold: f,
            auh: auh.auh,
            hull: auh.hull,
            points,
        });
    }
    let k = reports.len() as f64;
    let mean = reports.iter().map(|r| r.auh).sum::<f64>() / k;
    let var = reports
        .iter()
        .map(|r| (r.auh - mean) * (r.auh - mean))
        .sum::<f64>()
        / (k - 1.0);
    Ok(CvReport {
        mean_auh: mean,
        std_auh: var.sqrt(),
        trivial_fraction: trivial as f64 / total as f64,
        folds: reports,
    })
}

/// Positive-region shapes for the 2-D synthetic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Central axis-aligned square.
    Square,
    /// Axis-aligned box tucked into the (+1, +1) corner.
    Corner,
    /// 45-degree rotated square; deliberately not axis-aligned.
    Diamond,
    /// Union of two adjacent axis-aligned boxes.
    Castle,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Shape::Square),
            "corner" => Ok(Shape::Corner),
            "diamond" => Ok(Shape::Diamond),
            "castle" => Ok(Shape::Castle),
            other => Err(Error::UnknownShape {
                name: other.to_string(),
            }),
        }
    }
}

impl Shape {
    fn bounding_box(self) -> ([f64; 2], [f64; 2]) {
        match self {
            Shape::Square => ([-0.2, -0.2], [0.2, 0.2]),
            Shape::Corner => ([0.8, 0.8], [1.0, 1.0]),
            Shape::Diamond => ([-0.35, -0.35], [0.35, 0.35]),
            Shape::Castle => ([-0.4, -0.3], [0.4, 0.3]),
        }
    }

    fn contains(self, x: f64, y: f64) -> bool {
        match self {
            Shape::Square | Shape::Corner => true, // the bounding box is the region
            Shape::Diamond => x.abs() + y.abs() <= 0.35,
            Shape::Castle => {
                let base = (-0.4..=0.4).contains(&x) && (-0.3..=0.0).contains(&y);
                let tower = (-0.15..=0.15).contains(&x) && (0.0..=0.3).contains(&y);
                base || tower
            }
        }
    }
}

/// Generates a 2-D dataset: negatives uniform on [-1, 1]^2, positives uniform
/// inside the shape region, with counts respecting the imbalance ratio within
/// rounding. Deterministic given the seed.
pub fn generate_synthetic(shape: Shape, m: usize, ratio: f64, seed: u64) -> Result<Dataset> {
    if m < 10 {
        return Err(Error::InvalidConfig(format!(
            "synthetic datasets need at least 10 examples, got {m}"
        )));
    }
    if ratio < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "imbalance ratio must be at least 1, got {ratio}"
        )));
    }
    let positives = ((m as f64 / (1.0 + ratio)).round() as usize).max(1);
    let negatives = m - positives;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    let (lo, hi) = shape.bounding_box();
    for _ in 0..positives {
        loop {
            let x = rng.random_range(lo[0]..=hi[0]);
            let y = rng.random_range(lo[1]..=hi[1]);
            if shape.contains(x, y) {
                rows.push(vec![x, y]);
                labels.push(Label::Pos);
                break;
            }
        }
    }
    for _ in 0..negatives {
        let x = rng.random_range(-1.0..=1.0);
        let y = rng.random_range(-1.0..=1.0);
        rows.push(vec![x, y]);
        labels.push(Label::Neg);
    }
    Dataset::new(rows, labels, vec!["x1".to_string(), "x2".to_string()])
}
