//! Joint-fit reference solver used to verify the recursion.
//!
//! The incremental learner never sees old rows, so its correctness claim —
//! that phase k's weights equal the ridge solution over *all* phases up to
//! k — needs an independent check. [`joint_fit`] computes that solution the
//! straightforward way: accumulate every phase's Gram block and
//! cross-correlation block, factorize once, solve once. The class targets
//! are zero-padded to the full registry width, exactly the problem the
//! recursion claims to track. [`compare_states`] then measures how far a
//! recursively built state is from the reference.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::learner::{AnalyticState, PhaseUpdate};
use crate::linalg::{cholesky, symmetrize};

/// All phases' data plus the shared ridge strength.
#[derive(Debug, Clone)]
pub struct JointProblem {
    pub phases: Vec<PhaseUpdate>,
    pub gamma: f64,
}

/// The reference ridge solution over every phase at once.
#[derive(Debug, Clone)]
pub struct JointSolution {
    /// d_fe x C weights, columns in registry order.
    pub weights: Array2<f64>,
    /// Concatenation of the phases' class ids, in phase order.
    pub class_registry: Vec<u32>,
}

/// Solves the one-shot ridge problem over all phases.
///
/// Phase k's one-hot block lands in its own column range of the stacked
/// target; every other entry is zero. A single d x d factorization then
/// yields the weights the recursion is expected to reproduce.
pub fn joint_fit(problem: &JointProblem) -> Result<JointSolution> {
    if !(problem.gamma > 0.0 && problem.gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive and finite, got {}",
            problem.gamma
        )));
    }
    let first = problem
        .phases
        .first()
        .ok_or_else(|| Error::EmptyInput("joint problem has no phases".into()))?;
    let d = first.feature_dim();

    let mut class_registry: Vec<u32> = Vec::new();
    for phase in &problem.phases {
        if phase.feature_dim() != d {
            return Err(Error::DimensionMismatch {
                what: "phase feature width".into(),
                expected: d,
                actual: phase.feature_dim(),
            });
        }
        for &class in phase.class_ids() {
            if class_registry.contains(&class) {
                return Err(Error::DuplicateClass { class });
            }
            class_registry.push(class);
        }
    }
    if class_registry.is_empty() {
        return Err(Error::EmptyInput("joint problem has no classes".into()));
    }
    let total_rows: usize = problem.phases.iter().map(|p| p.n_samples()).sum();
    if total_rows == 0 {
        return Err(Error::EmptyInput("joint problem has no samples".into()));
    }

    let c = class_registry.len();
    let mut gram = Array2::<f64>::eye(d) * problem.gamma;
    let mut rhs = Array2::<f64>::zeros((d, c));
    let mut col = 0;
    for phase in &problem.phases {
        let x = phase.features();
        gram += &x.t().dot(&x);
        let width = phase.class_ids().len();
        rhs.slice_mut(s![.., col..col + width])
            .assign(&x.t().dot(&phase.onehot()));
        col += width;
    }
    symmetrize(&mut gram);
    let weights = cholesky(gram.view())?.solve(rhs.view())?;
    Ok(JointSolution {
        weights,
        class_registry,
    })
}

/// How far a recursively built state sits from the joint reference.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Largest absolute entry of the weight difference.
    pub max_abs: f64,
    /// Frobenius norm of the difference over that of the reference.
    pub rel_frobenius: f64,
    /// Whether `max_abs` is within the tolerance.
    pub pass: bool,
    /// Feature row and class id of the worst entry, if any.
    pub worst: Option<(usize, u32)>,
}

/// Compares a recursively built state against the joint solution.
///
/// The class registries must be identical (same ids, same order); the
/// weights are then compared entrywise and the worst offender located.
pub fn compare_states(
    joint: &JointSolution,
    state: &AnalyticState,
    tol: f64,
) -> Result<ComparisonReport> {
    if joint.class_registry != state.class_registry() {
        return Err(Error::ClassSetMismatch {
            detail: format!(
                "joint registry {:?} versus state registry {:?}",
                joint.class_registry,
                state.class_registry()
            ),
        });
    }
    if joint.weights.dim() != state.weights().dim() {
        return Err(Error::DimensionMismatch {
            what: "weight rows".into(),
            expected: joint.weights.nrows(),
            actual: state.weights().nrows(),
        });
    }
    let mut max_abs = 0.0f64;
    let mut worst = None;
    let mut diff_sq = 0.0f64;
    let mut ref_sq = 0.0f64;
    for ((row, col), &j) in joint.weights.indexed_iter() {
        let d = (j - state.weights()[(row, col)]).abs();
        diff_sq += d * d;
        ref_sq += j * j;
        if d > max_abs {
            max_abs = d;
            worst = Some((row, joint.class_registry[col]));
        }
    }
    let rel_frobenius = if ref_sq > 0.0 {
        (diff_sq / ref_sq).sqrt()
    } else {
        diff_sq.sqrt()
    };
    Ok(ComparisonReport {
        max_abs,
        rel_frobenius,
        pass: max_abs <= tol,
        worst,
    })
}
