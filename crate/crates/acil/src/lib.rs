//! Analytic class-incremental learning: a ridge classifier over frozen
//! random feature expansions whose per-phase updates are *exactly* the joint
//! solution.
//!
//! Class-incremental learners see classes arrive in phases and are usually
//! forced to trade plasticity against forgetting because old rows are gone.
//! This crate takes the analytic route instead: the classifier head is a
//! closed-form ridge regression onto one-hot targets, and alongside the
//! weights it carries the regularized inverse feature autocorrelation. That
//! one extra matrix is sufficient statistics for everything the old data
//! could say, so absorbing a new phase is a small closed-form rewrite — no
//! gradients, no replay buffer, and the result matches a from-scratch fit on
//! the union of all phases to within rounding error. Forgetting, in the
//! usual sense, never happens; the only accuracy drift left is the ridge
//! problem itself changing as classes are added.
//!
//! The pipeline in front of the head is deliberately frozen: an optional
//! extractor stage stands in for a pretrained backbone, and a seeded random
//! expansion (`relu(X·W)` with Gaussian `W`) widens features so the linear
//! head has room to separate classes.
//!
//! Module map:
//!
//! * [`dataset`] — sample sets, phase splitting, holdouts, one-hot encoding
//! * [`features`] — frozen extractors and the random expansion
//! * [`learner`] — [`AnalyticState`]: base fit, recursive updates,
//!   prediction, persistence
//! * [`oracle`] — the joint-fit reference solver and state comparison
//! * [`metrics`] — per-phase accuracy, its average, base-accuracy drift
//! * [`io`] — feature/label file formats
//! * [`linalg`] — the symmetric positive-definite Cholesky kernel
//!
//! # Quickstart
//!
//! Fit a base phase on half the classes, absorb the rest one class at a
//! time, and classify test rows the final model has never revisited:
//!
//! ```
//! use acil::{
//!     carve_holdout, phase_accuracy, split_phases, AnalyticState, FeatureExpander,
//!     PhaseDataset, PhaseUpdate, SampleSet, SplitPlan,
//! };
//! use ndarray::Array2;
//!
//! fn main() -> acil::Result<()> {
//!     // a toy corpus: 4 classes x 30 samples, 8 raw features; class c
//!     // lights up coordinates 2c and 2c+1
//!     let features = Array2::from_shape_fn((120, 8), |(i, j)| {
//!         f64::from(j / 2 == i / 30) + 0.2 * ((i * 31 + j * 17) as f64).sin()
//!     });
//!     let labels: Vec<u32> = (0..120).map(|i| (i / 30) as u32).collect();
//!     let data = SampleSet::new(features, labels)?;
//!
//!     // hold out test rows, put half the classes in the base phase, and
//!     // spread the rest over two increments
//!     let (train, test) = carve_holdout(&data, 0.2, 7)?;
//!     let phases = split_phases(&train, &SplitPlan::new(0.5, 2, 7)?)?;
//!
//!     // frozen random expansion from 8 to 64 dimensions
//!     let expander = FeatureExpander::new(8, 64, 0, FeatureExpander::default_std(8))?;
//!     let as_update = |p: &PhaseDataset| -> acil::Result<PhaseUpdate> {
//!         PhaseUpdate::new(
//!             expander.expand(p.features.view())?,
//!             p.onehot.clone(),
//!             p.class_ids.clone(),
//!         )
//!     };
//!
//!     let mut state = AnalyticState::fit_base(&as_update(&phases[0])?, 0.1)?;
//!     for phase in &phases[1..] {
//!         state.update(&as_update(phase)?)?;
//!     }
//!
//!     let pred = state.predict(expander.expand(test.features())?.view())?;
//!     let accuracy = phase_accuracy(&pred.labels, test.labels())?;
//!     assert!(accuracy > 0.9, "test accuracy {accuracy}");
//!     Ok(())
//! }
//! ```

// Compile and run every code block in the guide (book/) as a doc-test, so
// the book cannot drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/analytic-route.md")]
    mod analytic_route {}
    #[doc = include_str!("../../../book/src/recursive-updates.md")]
    mod recursive_updates {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}

pub mod dataset;
pub mod error;
pub mod features;
pub mod io;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod oracle;

pub use dataset::{
    carve_holdout, one_hot, split_phases, validate_disjoint, PhaseDataset, SampleSet, SplitPlan,
};
pub use error::{Error, Result};
pub use features::{
    FeatureExpander, FeatureExtractor, IdentityExtractor, RandomProjectionExtractor,
};
pub use io::{load_sample_set, read_features, read_labels, write_features, write_labels};
pub use learner::{AnalyticState, PhaseUpdate, Prediction, DEFAULT_CHUNK_ROWS};
pub use metrics::{
    average_incremental_accuracy, forgetting_rate, phase_accuracy, Forgetting, PhaseAccuracyLog,
};
pub use oracle::{compare_states, joint_fit, ComparisonReport, JointProblem, JointSolution};
