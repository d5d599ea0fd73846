//! Minimal end-to-end run: fit half the classes, absorb the rest in two
//! increments, and show that accuracy holds without revisiting old rows.
//!
//! ```text
//! cargo run --example quickstart
//! ```

use acil::{
    carve_holdout, phase_accuracy, split_phases, AnalyticState, FeatureExpander, PhaseDataset,
    PhaseUpdate, SampleSet, SplitPlan,
};
use ndarray::Array2;

fn main() -> acil::Result<()> {
    // a toy corpus: 4 classes x 30 samples, 8 raw features; class c lights
    // up coordinates 2c and 2c+1
    let features = Array2::from_shape_fn((120, 8), |(i, j)| {
        f64::from(j / 2 == i / 30) + 0.2 * ((i * 31 + j * 17) as f64).sin()
    });
    let labels: Vec<u32> = (0..120).map(|i| (i / 30) as u32).collect();
    let data = SampleSet::new(features, labels)?;

    // hold out test rows, put half the classes in the base phase, and
    // spread the rest over two increments
    let (train, test) = carve_holdout(&data, 0.2, 7)?;
    let phases = split_phases(&train, &SplitPlan::new(0.5, 2, 7)?)?;

    // frozen random expansion from 8 to 64 dimensions
    let expander = FeatureExpander::new(8, 64, 0, FeatureExpander::default_std(8))?;
    let as_update = |p: &PhaseDataset| -> acil::Result<PhaseUpdate> {
        PhaseUpdate::new(
            expander.expand(p.features.view())?,
            p.onehot.clone(),
            p.class_ids.clone(),
        )
    };

    let test_x = expander.expand(test.features())?;
    let mut state = AnalyticState::fit_base(&as_update(&phases[0])?, 0.1)?;
    for phase in &phases[1..] {
        state.update(&as_update(phase)?)?;
        let pred = state.predict(test_x.view())?;
        println!(
            "after phase {}: {} classes, full-test accuracy {:.3}",
            phase.phase_index,
            state.n_classes(),
            phase_accuracy(&pred.labels, test.labels())?
        );
    }

    let pred = state.predict(test_x.view())?;
    let accuracy = phase_accuracy(&pred.labels, test.labels())?;
    println!(
        "final: {} classes, accuracy {accuracy:.3}",
        state.n_classes()
    );
    assert!(accuracy > 0.9);
    Ok(())
}
