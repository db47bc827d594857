//! Built-in exact solver for desk-scale instances.
//!
//! The objective of a box drawing is piecewise constant in its boundaries:
//! it can only change when a boundary crosses a data coordinate. Searching
//! the finite grid of midpoints between consecutive data values (plus one
//! value beyond each extreme) is therefore exact. The solver runs a
//! depth-first branch and bound over candidate boxes, pruning with the bound
//! "current true positives + c_i * max achievable true negatives - c_e *
//! boxes used" against the incumbent; the all-negative trivial model is the
//! first incumbent, so a result always exists.

use std::collections::HashMap;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{AxisBox, BoxModel, Units};

use super::mip::ensure_normalized;
use super::{objective_value, ExactBoxesConfig};

/// Whether the search tree was exhausted within the node budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    ProvenOptimal,
    Incumbent,
}

/// Solver output. The objective is recomputed from the model independently
/// of the search bookkeeping.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub model: BoxModel,
    pub objective: f64,
    pub optimality: Optimality,
    pub nodes_explored: u64,
}

/// Candidate boundary values for feature `j`: midpoints between consecutive
/// distinct values, one value half a unit below the minimum, and one half a
/// unit above the maximum.
pub fn candidate_grid(data: &Dataset, j: usize) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut values: Vec<f64> = data.rows().map(|x| x[j]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut grid = Vec::with_capacity(values.len() + 1);
    grid.push(values[0] - 0.5);
    for w in values.windows(2) {
        grid.push((w[0] + w[1]) / 2.0);
    }
    grid.push(values[values.len() - 1] + 0.5);
    Ok(grid)
}

type Mask = Vec<u64>;

fn mask_zeros(m: usize) -> Mask {
    vec![0u64; m.div_ceil(64)]
}

fn mask_set(mask: &mut Mask, i: usize) {
    mask[i / 64] |= 1 << (i % 64);
}

fn mask_and(a: &Mask, b: &Mask) -> Mask {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn mask_or(a: &Mask, b: &Mask) -> Mask {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn mask_count(a: &Mask) -> u32 {
    a.iter().map(|x| x.count_ones()).sum()
}

fn mask_count_and(a: &Mask, b: &Mask) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

fn mask_adds_any(candidate: &Mask, pos: &Mask, union: &Mask) -> bool {
    candidate
        .iter()
        .zip(pos.iter().zip(union))
        .any(|(c, (p, u))| c & p & !u != 0)
}

/// One per-dimension boundary pair with the rows it admits in that dimension.
struct DimChoice {
    lower: f64,
    upper: f64,
    mask: Mask,
}

/// A fully assembled candidate box.
struct CandidateBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    mask: Mask,
    pos_count: u32,
}

struct Search {
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }
}

struct Enumeration<'a> {
    choices: &'a [Vec<DimChoice>],
    pos_mask: &'a Mask,
    seen: HashMap<Mask, ()>,
    out: Vec<CandidateBox>,
}

impl Enumeration<'_> {
    fn run(
        &mut self,
        dim: usize,
        partial_mask: &Mask,
        bounds: &mut Vec<(f64, f64)>,
        search: &mut Search,
    ) {
        if dim == self.choices.len() {
            if self.seen.insert(partial_mask.clone(), ()).is_none() {
                self.out.push(CandidateBox {
                    lower: bounds.iter().map(|b| b.0).collect(),
                    upper: bounds.iter().map(|b| b.1).collect(),
                    mask: partial_mask.clone(),
                    pos_count: mask_count_and(partial_mask, self.pos_mask),
                });
            }
            return;
        }
        for choice in &self.choices[dim] {
            if !search.tick() {
                return;
            }
            let mask = mask_and(partial_mask, &choice.mask);
            // A box admitting no positive is dominated by using no box at all.
            if mask_count_and(&mask, self.pos_mask) == 0 {
                continue;
            }
            bounds.push((choice.lower, choice.upper));
            self.run(dim + 1, &mask, bounds, search);
            bounds.pop();
            if search.exhausted {
                return;
            }
        }
    }
}

struct BranchAndBound<'a> {
    boxes: &'a [CandidateBox],
    pos_mask: &'a Mask,
    total_pos: u32,
    total_neg: u32,
    c_i: f64,
    c_e: f64,
    max_boxes: usize,
    best_score: f64,
    best_choice: Vec<usize>,
    chosen: Vec<usize>,
}

impl BranchAndBound<'_> {
    fn score(&self, union: &Mask, boxes_used: usize) -> f64 {
        let tp = mask_count_and(union, self.pos_mask);
        let fp = mask_count(union) - tp;
        let tn = self.total_neg - fp;
        tp as f64 + self.c_i * tn as f64 - self.c_e * boxes_used as f64
    }

    fn dfs(&mut self, start: usize, union: &Mask, depth: usize, search: &mut Search) {
        for r in start..self.boxes.len() {
            if !search.tick() {
                return;
            }
            if !mask_adds_any(&self.boxes[r].mask, self.pos_mask, union) {
                continue;
            }
            let next = mask_or(union, &self.boxes[r].mask);
            let score = self.score(&next, depth + 1);
            self.chosen.push(r);
            if score > self.best_score {
                self.best_score = score;
                self.best_choice = self.chosen.clone();
            }
            if depth + 1 < self.max_boxes {
                let tp = mask_count_and(&next, self.pos_mask);
                let remaining = (self.total_pos - tp) as f64;
                let upper_bound = score + (remaining - self.c_e).max(0.0);
                if upper_bound > self.best_score {
                    self.dfs(r + 1, &next, depth + 1, search);
                }
            }
            self.chosen.pop();
            if search.exhausted {
                return;
            }
        }
    }
}

/// Finds the best box drawing with at most `config.k` boxes over the
/// candidate grid, by exhaustive branch and bound. Returns a proven optimum
/// when the search finishes within `node_budget`, otherwise the best
/// incumbent found. Deterministic for identical inputs.
///
/// The margin of `config` plays no role in the search itself; it must stay
/// below half the smallest feature gap for the solution to lift to a
/// feasible assignment of the program.
pub fn solve_exact_small(
    data: &Dataset,
    config: &ExactBoxesConfig,
    node_budget: u64,
) -> Result<ExactSolution> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ensure_normalized(data)?;
    let m = data.len();
    let n = data.n_features();
    let n_neg = data.count_negatives() as u32;
    let n_pos = data.count_positives() as u32;

    let mut pos_mask = mask_zeros(m);
    for i in data.positive_rows() {
        mask_set(&mut pos_mask, i);
    }

    // The all-negative incumbent: no positives covered, every negative kept.
    let trivial_score = config.c_i * n_neg as f64;
    let mut search = Search {
        nodes: 1, // the trivial incumbent
        budget: node_budget.max(1),
        exhausted: false,
    };

    // Any optimal drawing can be replaced box-by-box with the tight grid box
    // around the positives it covers without losing objective value, so only
    // boundary pairs that hug positive values need enumerating.
    let mut choices: Vec<Vec<DimChoice>> = Vec::with_capacity(n);
    for j in 0..n {
        let grid = candidate_grid(data, j)?;
        let mut distinct: Vec<f64> = data.rows().map(|x| x[j]).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let pos_ranks: Vec<usize> = (0..distinct.len())
            .filter(|&t| {
                data.positive_rows()
                    .iter()
                    .any(|&i| data.row(i)[j] == distinct[t])
            })
            .collect();
        let mut dim_choices = Vec::new();
        for (a_idx, &ta) in pos_ranks.iter().enumerate() {
            for &tb in &pos_ranks[a_idx..] {
                let lower = grid[ta];
                let upper = grid[tb + 1];
                let mut mask = mask_zeros(m);
                for (i, x) in data.rows().enumerate() {
                    if lower <= x[j] && x[j] <= upper {
                        mask_set(&mut mask, i);
                    }
                }
                dim_choices.push(DimChoice { lower, upper, mask });
            }
        }
        choices.push(dim_choices);
    }

    let mut enumeration = Enumeration {
        choices: &choices,
        pos_mask: &pos_mask,
        seen: HashMap::new(),
        out: Vec::new(),
    };
    if n_pos > 0 {
        let full = vec![u64::MAX; m.div_ceil(64)];
        let mut bounds = Vec::with_capacity(n);
        enumeration.run(0, &full, &mut bounds, &mut search);
    }
    let mut candidates = enumeration.out;
    candidates.sort_by_key(|b| std::cmp::Reverse(b.pos_count));

    let mut bnb = BranchAndBound {
        boxes: &candidates,
        pos_mask: &pos_mask,
        total_pos: n_pos,
        total_neg: n_neg,
        c_i: config.c_i,
        c_e: config.c_e,
        max_boxes: config.k,
        best_score: trivial_score,
        best_choice: Vec::new(),
        chosen: Vec::new(),
    };
    if !search.exhausted && !candidates.is_empty() {
        let union = mask_zeros(m);
        bnb.dfs(0, &union, 0, &mut search);
    }

    let mut boxes: Vec<AxisBox> = bnb
        .best_choice
        .iter()
        .map(|&r| {
            AxisBox::new(candidates[r].lower.clone(), candidates[r].upper.clone())
                .expect("candidate boxes are ordered")
        })
        .collect();
    boxes.sort_by(|a, b| {
        a.lower()
            .iter()
            .chain(a.upper())
            .zip(b.lower().iter().chain(b.upper()))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let model = BoxModel::new(
        boxes,
        None,
        Units::Normalized,
        data.feature_names().to_vec(),
    )?;
    let objective = objective_value(&model, data, config.c_i, config.c_e)?;
    Ok(ExactSolution {
        model,
        objective,
        optimality: if search.exhausted {
            Optimality::Incumbent
        } else {
            Optimality::ProvenOptimal
        },
        nodes_explored: search.nodes,
    })
}
