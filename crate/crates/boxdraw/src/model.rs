//! Box models: unions of axis-parallel rectangles, prediction, rule
//! rendering, and the JSON persistence format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, NormParams};
use crate::error::{Error, Result};

/// One axis-parallel rectangle. Boundaries may be infinite; an infinite
/// boundary does not constrain its side. Containment is inclusive at both
/// ends.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for j in 0..lower.len() {
            if lower[j].is_nan() || upper[j].is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "box boundary for dimension {j} is NaN"
                )));
            }
            if lower[j] > upper[j] {
                return Err(Error::InvalidConfig(format!(
                    "degenerate box: lower {} > upper {} in dimension {j}",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Box that contains every point of the given dimension.
    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Inclusive containment in every dimension.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }
}

/// Whether a model's boundaries are in normalized [-1, 1] units or the
/// original feature units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Normalized,
    Original,
}

/// A union of axis-parallel boxes. Predicts +1 inside any box, -1 outside
/// all of them; zero boxes is the trivial all-negative model.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxModel {
    boxes: Vec<AxisBox>,
    norm: Option<NormParams>,
    units: Units,
    feature_names: Vec<String>,
}

impl BoxModel {
    pub fn new(
        boxes: Vec<AxisBox>,
        norm: Option<NormParams>,
        units: Units,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = feature_names.len();
        for b in &boxes {
            if b.n_dims() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: b.n_dims(),
                });
            }
        }
        if let Some(p) = &norm {
            if p.n_features() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.n_features(),
                });
            }
        }
        Ok(Self {
            boxes,
            norm,
            units,
            feature_names,
        })
    }

    /// The trivial all-negative model (zero boxes).
    pub fn trivial_negative(feature_names: Vec<String>) -> Self {
        Self {
            boxes: Vec::new(),
            norm: None,
            units: Units::Original,
            feature_names,
        }
    }

    pub fn boxes(&self) -> &[AxisBox] {
        &self.boxes
    }

    pub fn num_boxes(&self) -> usize {
        self.boxes.len()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn norm(&self) -> Option<&NormParams> {
        self.norm.as_ref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// +1 iff the point lies inside at least one box.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        Ok(if self.boxes.iter().any(|b| b.contains(x)) {
            Label::Pos
        } else {
            Label::Neg
        })
    }

    /// Predicts every row of a dataset after a single dimension check.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<Label>> {
        if data.n_features() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: data.n_features(),
            });
        }
        Ok(data
            .rows()
            .map(|x| {
                if self.boxes.iter().any(|b| b.contains(x)) {
                    Label::Pos
                } else {
                    Label::Neg
                }
            })
            .collect())
    }

    /// Renders the model as human-readable rules, one clause per box.
    ///
    /// Per feature the clause says "above L", "below U", or "between L and U";
    /// a feature unbounded on both sides is omitted entirely. A single box
    /// prints as a bare clause; multiple boxes print one "box i:" line each.
    /// Equal models produce byte-identical text.
    pub fn describe(&self) -> String {
        if self.boxes.is_empty() {
            return "always predict negative".to_string();
        }
        let clauses: Vec<String> = self.boxes.iter().map(|b| self.clause(b)).collect();
        if clauses.len() == 1 {
            clauses.into_iter().next().unwrap()
        } else {
            clauses
                .into_iter()
                .enumerate()
                .map(|(i, c)| format!("box {}: {c}", i + 1))
                .collect::<Vec<_>>()
                .join("\n")
        }
    }

    fn clause(&self, b: &AxisBox) -> String {
        let mut parts = Vec::new();
        for j in 0..b.n_dims() {
            let name = &self.feature_names[j];
            let (lo, hi) = (b.lower()[j], b.upper()[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => {}
                (true, false) => parts.push(format!("{name} above {lo}")),
                (false, true) => parts.push(format!("{name} below {hi}")),
                (true, true) => parts.push(format!("{name} between {lo} and {hi}")),
            }
        }
        if parts.is_empty() {
            "any point".to_string()
        } else {
            parts.join("; ")
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelJson::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        raw.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Maps a model trained in normalized units back to original units.
///
/// Finite boundaries go through the inverse affine transform; infinite
/// boundaries are preserved. The normalization parameters are recorded on the
/// result and the units flag flips.
pub fn denormalize_model(model: &BoxModel, params: &NormParams) -> Result<BoxModel> {
    if model.units() != Units::Normalized {
        return Err(Error::Precondition(
            "denormalize_model requires a model in normalized units".to_string(),
        ));
    }
    if params.n_features() != model.feature_names().len() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_names().len(),
            got: params.n_features(),
        });
    }
    let boxes = model
        .boxes()
        .iter()
        .map(|b| {
            let lower = (0..b.n_dims())
                .map(|j| params.invert_value(j, b.lower()[j]))
                .collect();
            let upper = (0..b.n_dims())
                .map(|j| params.invert_value(j, b.upper()[j]))
                .collect();
            AxisBox::new(lower, upper)
        })
        .collect::<Result<Vec<_>>>()?;
    BoxModel::new(
        boxes,
        Some(params.clone()),
        Units::Original,
        model.feature_names().to_vec(),
    )
}

/// Inverse of [`denormalize_model`]: maps original-unit boundaries into
/// normalized units.
pub fn normalize_model(model: &BoxModel, params: &NormParams) -> Result<BoxModel> {
    if model.units() != Units::Original {
        return Err(Error::Precondition(
            "normalize_model requires a model in original units".to_string(),
        ));
    }
    if params.n_features() != model.feature_names().len() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_names().len(),
            got: params.n_features(),
        });
    }
    let boxes = model
        .boxes()
        .iter()
        .map(|b| {
            let map = |j: usize, v: f64| {
                if v.is_infinite() {
                    v
                } else {
                    params.apply_value(j, v)
                }
            };
            let lower = (0..b.n_dims()).map(|j| map(j, b.lower()[j])).collect();
            let upper = (0..b.n_dims()).map(|j| map(j, b.upper()[j])).collect();
            AxisBox::new(lower, upper)
        })
        .collect::<Result<Vec<_>>>()?;
    BoxModel::new(
        boxes,
        Some(params.clone()),
        Units::Normalized,
        model.feature_names().to_vec(),
    )
}

// On-disk schema. Unbounded sides serialize as null, so plain JSON numbers
// suffice.
#[derive(Serialize, Deserialize)]
struct BoxJson {
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    feature_names: Vec<String>,
    units: Units,
    normalization: Option<NormParams>,
    boxes: Vec<BoxJson>,
}

impl From<&BoxModel> for ModelJson {
    fn from(m: &BoxModel) -> Self {
        ModelJson {
            feature_names: m.feature_names.clone(),
            units: m.units,
            normalization: m.norm.clone(),
            boxes: m
                .boxes
                .iter()
                .map(|b| BoxJson {
                    lower: b
                        .lower()
                        .iter()
                        .map(|&v| if v.is_finite() { Some(v) } else { None })
                        .collect(),
                    upper: b
                        .upper()
                        .iter()
                        .map(|&v| if v.is_finite() { Some(v) } else { None })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelJson> for BoxModel {
    type Error = Error;

    fn try_from(raw: ModelJson) -> Result<Self> {
        let boxes = raw
            .boxes
            .into_iter()
            .map(|b| {
                let lower = b
                    .lower
                    .into_iter()
                    .map(|v| v.unwrap_or(f64::NEG_INFINITY))
                    .collect();
                let upper = b
                    .upper
                    .into_iter()
                    .map(|v| v.unwrap_or(f64::INFINITY))
                    .collect();
                AxisBox::new(lower, upper)
            })
            .collect::<Result<Vec<_>>>()?;
        BoxModel::new(boxes, raw.normalization, raw.units, raw.feature_names)
    }
}
