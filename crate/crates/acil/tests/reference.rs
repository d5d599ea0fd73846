//! Equivalence of the crate's solvers against an independent dense
//! reference: the base fit, the joint oracle, and the recursion itself are
//! each checked against Gauss-Jordan solutions of the literal stacked
//! system.

mod common;

use acil::{one_hot, AnalyticState, JointProblem, PhaseUpdate};
use common::{cycling_labels, max_abs_vs_rows, naive_ridge, to_rows, uniform_matrix};

fn phase(rows: usize, d: usize, seed: u64, classes: &[u32]) -> PhaseUpdate {
    let x = uniform_matrix(rows, d, seed, 1.0);
    let labels = cycling_labels(rows, classes);
    let onehot = one_hot(&labels, classes).unwrap();
    PhaseUpdate::new(x, onehot, classes.to_vec()).unwrap()
}

/// Stacks phases into one literal system: all rows concatenated, targets
/// one-hot against the full class list (zeros outside each phase's block).
fn stacked_system(phases: &[PhaseUpdate]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<u32>) {
    let registry: Vec<u32> = phases
        .iter()
        .flat_map(|p| p.class_ids().iter().copied())
        .collect();
    let mut x_rows = Vec::new();
    let mut y_rows = Vec::new();
    let mut offset = 0;
    for phase in phases {
        let x = phase.features();
        let y = phase.onehot();
        for i in 0..x.nrows() {
            x_rows.push(x.row(i).to_vec());
            let mut target = vec![0.0; registry.len()];
            for (j, &v) in y.row(i).iter().enumerate() {
                target[offset + j] = v;
            }
            y_rows.push(target);
        }
        offset += phase.class_ids().len();
    }
    (x_rows, y_rows, registry)
}

#[test]
fn base_fit_matches_the_independent_solver() {
    let gamma = 0.1;
    let base = phase(50, 16, 11, &[0, 1, 2, 3]);
    let state = AnalyticState::fit_base(&base, gamma).unwrap();

    let expected = naive_ridge(&to_rows(base.features()), &to_rows(base.onehot()), gamma);
    let worst = max_abs_vs_rows(state.weights(), &expected);
    assert!(worst <= 1e-10, "max abs deviation {worst}");
}

#[test]
fn joint_oracle_matches_the_literal_stacked_system() {
    let gamma = 0.35;
    let phases = vec![
        phase(30, 12, 1, &[0, 1, 2]),
        phase(9, 12, 2, &[3]),
        phase(17, 12, 3, &[4, 5]),
    ];
    let joint = acil::joint_fit(&JointProblem {
        phases: phases.clone(),
        gamma,
    })
    .unwrap();

    let (x_rows, y_rows, registry) = stacked_system(&phases);
    assert_eq!(joint.class_registry, registry);
    let expected = naive_ridge(&x_rows, &y_rows, gamma);
    let worst = max_abs_vs_rows(joint.weights.view(), &expected);
    assert!(worst <= 1e-10, "max abs deviation {worst}");
}

#[test]
fn recursion_matches_the_independent_solver_on_both_branches() {
    // d = 8: the 5-row phase exercises the low-rank route, the 20-row phase
    // the dense refactorization
    let gamma = 0.05;
    let phases = vec![
        phase(24, 8, 4, &[0, 1]),
        phase(5, 8, 5, &[2]),
        phase(20, 8, 6, &[3, 4]),
    ];

    let mut state = AnalyticState::fit_base(&phases[0], gamma).unwrap();
    for p in &phases[1..] {
        state.update(p).unwrap();
    }

    let (x_rows, y_rows, registry) = stacked_system(&phases);
    assert_eq!(state.class_registry(), &registry[..]);
    let expected = naive_ridge(&x_rows, &y_rows, gamma);
    let worst = max_abs_vs_rows(state.weights(), &expected);
    assert!(worst <= 1e-8, "max abs deviation {worst}");
}

#[test]
fn chunked_recursion_matches_the_independent_solver() {
    let gamma = 0.2;
    let base = phase(20, 6, 7, &[0, 1]);
    let increment = phase(33, 6, 8, &[2, 3]);

    let mut state = AnalyticState::fit_base(&base, gamma).unwrap();
    state.update_chunked(&increment, 4).unwrap();

    let (x_rows, y_rows, _) = stacked_system(&[base, increment]);
    let expected = naive_ridge(&x_rows, &y_rows, gamma);
    let worst = max_abs_vs_rows(state.weights(), &expected);
    assert!(worst <= 1e-8, "max abs deviation {worst}");
}

#[test]
fn rows_without_new_classes_still_match_the_reference() {
    // an increment may carry extra rows of already-teachable structure:
    // zero-width one-hot, so the rows only sharpen the autocorrelation
    let gamma = 0.4;
    let base = phase(15, 5, 9, &[0, 1]);
    let extra_x = uniform_matrix(7, 5, 10, 1.0);
    let extra = PhaseUpdate::new(extra_x.clone(), ndarray::Array2::zeros((7, 0)), vec![]).unwrap();

    let mut state = AnalyticState::fit_base(&base, gamma).unwrap();
    state.update(&extra).unwrap();

    let mut x_rows = to_rows(base.features());
    let mut y_rows = to_rows(base.onehot());
    for i in 0..extra_x.nrows() {
        x_rows.push(extra_x.row(i).to_vec());
        y_rows.push(vec![0.0; 2]);
    }
    let expected = naive_ridge(&x_rows, &y_rows, gamma);
    let worst = max_abs_vs_rows(state.weights(), &expected);
    assert!(worst <= 1e-9, "max abs deviation {worst}");
}
