//! Box drawing classifiers for imbalanced binary classification.
//!
//! A box drawing classifier is a union of axis-parallel rectangles around the
//! minority class: a point is predicted positive iff it falls inside at least
//! one box. The crate provides two trainers plus the evaluation protocol that
//! goes with them:
//!
//! - [`fastboxes`]: clusters the minority class, wraps each cluster in a
//!   tight box, then places every boundary with a closed-form minimizer of a
//!   regularized exponential loss and expands out to the nearest negative.
//! - [`exactboxes`]: builds the mixed-integer program whose optimum is the
//!   best possible box drawing, emits it as solver-neutral LP text, and
//!   solves desk-scale instances exactly over the finite candidate-boundary
//!   grid.
//! - [`eval`]: cost sweeps, ROC convex hull area (AUH), stratified
//!   cross-validation, and synthetic benchmark generators.
//! - [`bounds`]: the counting-based generalization bound for box drawings.
//!
//! All types are immutable after construction and all operations are pure
//! functions of their inputs plus explicit seeds, so results are reproducible
//! run to run.

pub mod bounds;
pub mod data;
pub mod error;
pub mod eval;
pub mod exactboxes;
pub mod fastboxes;
pub mod model;

pub use data::{normalize, Dataset, Label, NormParams};
pub use error::{Error, Result};
pub use model::{denormalize_model, normalize_model, AxisBox, BoxModel, Units};
