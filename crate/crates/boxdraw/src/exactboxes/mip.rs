//! Builds the mixed-integer program whose optimum is the best box drawing,
//! serializes it as solver-neutral LP text, and validates assignments
//! against every linearized constraint.
//!
//! Variables, for K boxes over m examples and n features:
//! continuous boundaries `l_j_k` and `u_j_k`; binary indicators `lt_i_j_k`
//! (example i clears the lower boundary of box k in dimension j by the
//! margin), `ut_i_j_k` (same for the upper boundary), `w_i_k` (example i is
//! in box k), and `z_i` (example i is classified correctly). Constraint rows
//! carry the tag of the linearization family they came from (5 through 21)
//! and are named `c<tag>_<i>_<j>_<k>` with unused indices omitted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{AxisBox, BoxModel, Units};

use super::ExactBoxesConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

/// Row sense; every family of the formulation normalizes to `<=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
}

/// One linear row: sum of coefficient * variable `sense` rhs.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    /// Constraint family this row linearizes (5..=21).
    pub tag: u8,
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The full program: variables, rows, and the maximization objective. The
/// constant `-c_e * K` is kept separate from the variable terms.
#[derive(Debug, Clone)]
pub struct MipModel {
    pub n_examples: usize,
    pub n_features: usize,
    pub k: usize,
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
}

impl MipModel {
    pub fn var_l(&self, j: usize, k: usize) -> usize {
        j * self.k + k
    }

    pub fn var_u(&self, j: usize, k: usize) -> usize {
        self.n_features * self.k + j * self.k + k
    }

    pub fn var_lt(&self, i: usize, j: usize, k: usize) -> usize {
        2 * self.n_features * self.k + (i * self.n_features + j) * self.k + k
    }

    pub fn var_ut(&self, i: usize, j: usize, k: usize) -> usize {
        self.var_lt(i, j, k) + self.n_examples * self.n_features * self.k
    }

    pub fn var_w(&self, i: usize, k: usize) -> usize {
        2 * self.k * self.n_features * (1 + self.n_examples) + i * self.k + k
    }

    pub fn var_z(&self, i: usize) -> usize {
        self.var_w(self.n_examples, 0) + i
    }

    pub fn count_binary(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn count_continuous(&self) -> usize {
        self.variables.len() - self.count_binary()
    }
}

pub(crate) fn ensure_normalized(data: &Dataset) -> Result<()> {
    for (i, x) in data.rows().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            if v.abs() > 1.0 + 1e-9 {
                return Err(Error::Unnormalized {
                    row: i,
                    column: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Builds the complete linearized program for normalized data.
pub fn build_mip(data: &Dataset, config: &ExactBoxesConfig) -> Result<MipModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ensure_normalized(data)?;
    let (m, n, k_boxes) = (data.len(), data.n_features(), config.k);
    let mut diameter = 0.0f64;
    for j in 0..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in data.rows() {
            lo = lo.min(x[j]);
            hi = hi.max(x[j]);
        }
        diameter = diameter.max(hi - lo);
    }
    if config.big_m <= diameter + config.margin {
        return Err(Error::InvalidConfig(format!(
            "big_m = {} must exceed the data diameter {} plus the margin {}",
            config.big_m, diameter, config.margin
        )));
    }

    let mut variables = Vec::with_capacity(2 * n * k_boxes * (1 + m) + m * k_boxes + m);
    for j in 0..n {
        for k in 0..k_boxes {
            variables.push(Variable {
                name: format!("l_{j}_{k}"),
                kind: VarKind::Continuous,
            });
        }
    }
    for j in 0..n {
        for k in 0..k_boxes {
            variables.push(Variable {
                name: format!("u_{j}_{k}"),
                kind: VarKind::Continuous,
            });
        }
    }
    for prefix in ["lt", "ut"] {
        for i in 0..m {
            for j in 0..n {
                for k in 0..k_boxes {
                    variables.push(Variable {
                        name: format!("{prefix}_{i}_{j}_{k}"),
                        kind: VarKind::Binary,
                    });
                }
            }
        }
    }
    for i in 0..m {
        for k in 0..k_boxes {
            variables.push(Variable {
                name: format!("w_{i}_{k}"),
                kind: VarKind::Binary,
            });
        }
    }
    for i in 0..m {
        variables.push(Variable {
            name: format!("z_{i}"),
            kind: VarKind::Binary,
        });
    }

    let mut model = MipModel {
        n_examples: m,
        n_features: n,
        k: k_boxes,
        variables,
        constraints: Vec::new(),
        objective: Vec::new(),
        objective_constant: -config.c_e * k_boxes as f64,
    };

    let (big_m, v, eps) = (config.big_m, config.margin, config.eps_strict);
    let positives = data.positive_rows();
    let negatives = data.negative_rows();
    let two_n = 2.0 * n as f64;

    let push = |model: &mut MipModel, tag: u8, name: String, terms: Vec<(usize, f64)>, rhs: f64| {
        model.constraints.push(LinearConstraint {
            tag,
            name,
            terms,
            sense: Sense::Le,
            rhs,
        });
    };

    // Margin indicators for positives: lt_ijk = 1 iff x_ij > l_jk + v and
    // ut_ijk = 1 iff x_ij < u_jk - v, as big-M pairs.
    for &tag in &[5u8, 6, 7, 8] {
        for &i in &positives {
            for j in 0..n {
                for k in 0..k_boxes {
                    let x = data.row(i)[j];
                    let (terms, rhs) = match tag {
                        5 => (
                            vec![(model.var_l(j, k), -1.0), (model.var_lt(i, j, k), -big_m)],
                            v - x,
                        ),
                        6 => (
                            vec![(model.var_l(j, k), 1.0), (model.var_lt(i, j, k), big_m)],
                            x - v + big_m - eps,
                        ),
                        7 => (
                            vec![(model.var_u(j, k), 1.0), (model.var_ut(i, j, k), -big_m)],
                            x + v,
                        ),
                        _ => (
                            vec![(model.var_u(j, k), -1.0), (model.var_ut(i, j, k), big_m)],
                            -x - v + big_m - eps,
                        ),
                    };
                    let name = format!("c{tag}_{i}_{j}_{k}");
                    push(&mut model, tag, name, terms, rhs);
                }
            }
        }
    }

    // Box membership for positives: w_ik = 1 iff all 2n indicators are 1.
    for &i in &positives {
        for k in 0..k_boxes {
            let mut terms9: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
            let mut terms10: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
            terms10.push((model.var_w(i, k), two_n));
            for j in 0..n {
                terms9.push((model.var_lt(i, j, k), 1.0));
                terms9.push((model.var_ut(i, j, k), 1.0));
                terms10.push((model.var_lt(i, j, k), -1.0));
                terms10.push((model.var_ut(i, j, k), -1.0));
            }
            terms9.push((model.var_w(i, k), -1.0));
            push(&mut model, 9, format!("c9_{i}_{k}"), terms9, two_n - 1.0);
            push(&mut model, 10, format!("c10_{i}_{k}"), terms10, 0.0);
        }
    }

    // Coverage for positives: z_i = 1 iff some box contains example i.
    for &i in &positives {
        let mut terms11: Vec<(usize, f64)> =
            (0..k_boxes).map(|k| (model.var_w(i, k), 1.0)).collect();
        terms11.push((model.var_z(i), -(k_boxes as f64)));
        push(&mut model, 11, format!("c11_{i}"), terms11, 0.0);
        let mut terms12 = vec![(model.var_z(i), 1.0)];
        terms12.extend((0..k_boxes).map(|k| (model.var_w(i, k), -1.0)));
        push(&mut model, 12, format!("c12_{i}"), terms12, 0.0);
    }

    // Margin indicators for negatives: lt_ijk = 1 iff x_ij < l_jk - v and
    // ut_ijk = 1 iff x_ij > u_jk + v.
    for &tag in &[13u8, 14, 15, 16] {
        for &i in &negatives {
            for j in 0..n {
                for k in 0..k_boxes {
                    let x = data.row(i)[j];
                    let (terms, rhs) = match tag {
                        13 => (
                            vec![(model.var_l(j, k), 1.0), (model.var_lt(i, j, k), -big_m)],
                            x + v,
                        ),
                        14 => (
                            vec![(model.var_l(j, k), -1.0), (model.var_lt(i, j, k), big_m)],
                            -x - v + big_m - eps,
                        ),
                        15 => (
                            vec![(model.var_u(j, k), -1.0), (model.var_ut(i, j, k), -big_m)],
                            -x + v,
                        ),
                        _ => (
                            vec![(model.var_u(j, k), 1.0), (model.var_ut(i, j, k), big_m)],
                            x - v + big_m - eps,
                        ),
                    };
                    let name = format!("c{tag}_{i}_{j}_{k}");
                    push(&mut model, tag, name, terms, rhs);
                }
            }
        }
    }

    // Box membership for negatives: w_ik = 0 iff the example clears some
    // boundary of box k with margin.
    for &i in &negatives {
        for k in 0..k_boxes {
            let mut terms17: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
            let mut terms18: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
            for j in 0..n {
                terms17.push((model.var_lt(i, j, k), 1.0));
                terms17.push((model.var_ut(i, j, k), 1.0));
                terms18.push((model.var_lt(i, j, k), -1.0));
                terms18.push((model.var_ut(i, j, k), -1.0));
            }
            terms17.push((model.var_w(i, k), two_n));
            terms18.push((model.var_w(i, k), -1.0));
            push(
                &mut model,
                17,
                format!("c17_{i}_{k}"),
                terms17,
                2.0 * two_n - 1.0,
            );
            push(&mut model, 18, format!("c18_{i}_{k}"), terms18, -1.0);
        }
    }

    // Coverage for negatives: z_i = 0 iff some box contains example i.
    for &i in &negatives {
        let mut terms19: Vec<(usize, f64)> =
            (0..k_boxes).map(|k| (model.var_w(i, k), 1.0)).collect();
        terms19.push((model.var_z(i), k_boxes as f64));
        push(&mut model, 19, format!("c19_{i}"), terms19, k_boxes as f64);
        let mut terms20 = vec![(model.var_z(i), -1.0)];
        terms20.extend((0..k_boxes).map(|k| (model.var_w(i, k), -1.0)));
        push(&mut model, 20, format!("c20_{i}"), terms20, -1.0);
    }

    // Non-degeneracy: l_jk <= u_jk.
    for j in 0..n {
        for k in 0..k_boxes {
            let terms = vec![(model.var_l(j, k), 1.0), (model.var_u(j, k), -1.0)];
            push(&mut model, 21, format!("c21_{j}_{k}"), terms, 0.0);
        }
    }

    for &i in &positives {
        model.objective.push((model.var_z(i), 1.0));
    }
    for &i in &negatives {
        model.objective.push((model.var_z(i), config.c_i));
    }

    Ok(model)
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], variables: &[Variable]) {
    for (pos, &(var, coef)) in terms.iter().enumerate() {
        let name = &variables[var].name;
        let magnitude = coef.abs();
        if pos == 0 {
            if coef < 0.0 {
                out.push_str("- ");
            }
        } else if coef < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if magnitude == 1.0 {
            let _ = write!(out, "{name}");
        } else {
            let _ = write!(out, "{magnitude} {name}");
        }
    }
}

/// Serializes the model as LP text (Maximize / Subject To / Bounds / Binary
/// sections). Byte-deterministic for a given model; empty sections are
/// omitted.
pub fn lp_string(model: &MipModel) -> String {
    let mut out = String::new();
    out.push_str("Maximize\n obj: ");
    write_terms(&mut out, &model.objective, &model.variables);
    if model.objective_constant != 0.0 {
        let c = model.objective_constant;
        if c < 0.0 {
            let _ = write!(out, " - {}", -c);
        } else {
            let _ = write!(out, " + {c}");
        }
    }
    out.push('\n');
    if !model.constraints.is_empty() {
        out.push_str("Subject To\n");
        for row in &model.constraints {
            let _ = write!(out, " {}: ", row.name);
            write_terms(&mut out, &row.terms, &model.variables);
            match row.sense {
                Sense::Le => {
                    let _ = writeln!(out, " <= {}", row.rhs);
                }
            }
        }
    }
    let continuous: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Continuous)
        .collect();
    if !continuous.is_empty() {
        out.push_str("Bounds\n");
        for v in continuous {
            let _ = writeln!(out, " {} free", v.name);
        }
    }
    let binaries: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for v in binaries {
            let _ = writeln!(out, " {}", v.name);
        }
    }
    out.push_str("End\n");
    out
}

/// Writes [`lp_string`] to a file.
pub fn emit_lp(model: &MipModel, path: &Path) -> Result<()> {
    std::fs::write(path, lp_string(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Variable values keyed by name. The text form is one `name value` pair per
/// line; blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    values: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::InvalidConfig(format!(
                    "solution line {} is not `name value`: {line:?}",
                    lineno + 1
                )));
            };
            let value: f64 = value.parse().map_err(|_| {
                Error::InvalidConfig(format!(
                    "solution line {} has a non-numeric value: {line:?}",
                    lineno + 1
                ))
            })?;
            values.insert(name.to_string(), value);
        }
        Ok(Self { values })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, value) in &self.values {
            let _ = writeln!(out, "{name} {value}");
        }
        out
    }
}

/// One violated row reported by [`check_feasibility`].
#[derive(Debug, Clone)]
pub struct Violation {
    pub constraint: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Evaluates every constraint under the assignment. An empty report means
/// feasible. Binary variables must be 0 or 1 and every model variable must be
/// present.
pub fn check_feasibility(model: &MipModel, assignment: &Assignment) -> Result<Vec<Violation>> {
    let mut values = Vec::with_capacity(model.variables.len());
    for var in &model.variables {
        let value = assignment
            .get(&var.name)
            .ok_or_else(|| Error::MissingVariable {
                name: var.name.clone(),
            })?;
        if var.kind == VarKind::Binary && (value - value.round()).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "binary variable {} has non-integral value {value}",
                var.name
            )));
        }
        values.push(value);
    }
    let mut violations = Vec::new();
    for row in &model.constraints {
        let lhs: f64 = row
            .terms
            .iter()
            .map(|&(var, coef)| coef * values[var])
            .sum();
        let violated = match row.sense {
            Sense::Le => lhs > row.rhs + 1e-9,
        };
        if violated {
            violations.push(Violation {
                constraint: row.name.clone(),
                lhs,
                rhs: row.rhs,
            });
        }
    }
    Ok(violations)
}

/// Derives the full indicator assignment implied by a box model, padding with
/// empty point boxes below the data when the model has fewer than `k_total`
/// boxes. The result satisfies constraints (5)-(21) whenever every data point
/// clears every boundary by more than the margin.
pub fn lift_assignment(
    model: &BoxModel,
    data: &Dataset,
    config: &ExactBoxesConfig,
    k_total: usize,
) -> Result<Assignment> {
    let n = data.n_features();
    if model.feature_names().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: model.feature_names().len(),
        });
    }
    if model.num_boxes() > k_total {
        return Err(Error::Precondition(format!(
            "model has {} boxes but the program only has {k_total}",
            model.num_boxes()
        )));
    }
    let mut boxes: Vec<(Vec<f64>, Vec<f64>)> = model
        .boxes()
        .iter()
        .map(|b| (b.lower().to_vec(), b.upper().to_vec()))
        .collect();
    // Pad with point boxes half a unit below the data; they contain nothing.
    let pad: Vec<f64> = (0..n)
        .map(|j| data.rows().map(|x| x[j]).fold(f64::INFINITY, f64::min) - 0.5)
        .collect();
    while boxes.len() < k_total {
        boxes.push((pad.clone(), pad.clone()));
    }

    let v = config.margin;
    let mut assignment = Assignment::new();
    for (k, (lower, upper)) in boxes.iter().enumerate() {
        for j in 0..n {
            assignment.set(format!("l_{j}_{k}"), lower[j]);
            assignment.set(format!("u_{j}_{k}"), upper[j]);
        }
    }
    for (i, x) in data.rows().enumerate() {
        let positive = data.label(i).is_positive();
        let mut in_any_box = false;
        for (k, (lower, upper)) in boxes.iter().enumerate() {
            let mut indicator_sum = 0usize;
            let mut all_inside = true;
            for j in 0..n {
                let (lt, ut) = if positive {
                    (x[j] > lower[j] + v, x[j] < upper[j] - v)
                } else {
                    (x[j] < lower[j] - v, x[j] > upper[j] + v)
                };
                assignment.set(format!("lt_{i}_{j}_{k}"), if lt { 1.0 } else { 0.0 });
                assignment.set(format!("ut_{i}_{j}_{k}"), if ut { 1.0 } else { 0.0 });
                indicator_sum += usize::from(lt) + usize::from(ut);
                all_inside &= lt && ut;
            }
            let w = if positive {
                all_inside
            } else {
                indicator_sum == 0
            };
            assignment.set(format!("w_{i}_{k}"), if w { 1.0 } else { 0.0 });
            in_any_box |= w;
        }
        let z = if positive { in_any_box } else { !in_any_box };
        assignment.set(format!("z_{i}"), if z { 1.0 } else { 0.0 });
    }
    Ok(assignment)
}

/// Rebuilds the box model encoded by the boundary variables of an assignment.
pub fn model_from_assignment(
    assignment: &Assignment,
    feature_names: &[String],
    k: usize,
) -> Result<BoxModel> {
    let n = feature_names.len();
    let mut boxes = Vec::with_capacity(k);
    for box_idx in 0..k {
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for j in 0..n {
            let l_name = format!("l_{j}_{box_idx}");
            let u_name = format!("u_{j}_{box_idx}");
            lower.push(
                assignment
                    .get(&l_name)
                    .ok_or(Error::MissingVariable { name: l_name })?,
            );
            upper.push(
                assignment
                    .get(&u_name)
                    .ok_or(Error::MissingVariable { name: u_name })?,
            );
        }
        boxes.push(AxisBox::new(lower, upper)?);
    }
    BoxModel::new(boxes, None, Units::Normalized, feature_names.to_vec())
}
