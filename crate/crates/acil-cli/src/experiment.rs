//! The experiment pipeline: file loading, the frozen feature stages, the
//! phased fit, and evaluation.
//!
//! Phases run strictly in order (each update depends on the last state),
//! but evaluating a phase is read-only, so test batches are scored in
//! parallel. The test set is expanded once up front and each phase's "seen"
//! union just grows an index list — files are never re-read.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use acil::{
    compare_states, joint_fit, load_sample_set, split_phases, AnalyticState, ComparisonReport,
    FeatureExpander, FeatureExtractor, IdentityExtractor, JointProblem, PhaseUpdate,
    RandomProjectionExtractor, SampleSet, SplitPlan,
};

use crate::config::{ExperimentConfig, ExtractorKind, ResolvedPaths};
use crate::failure::{Failure, Result};
use crate::report::{ForgettingEntry, PhaseEntry, SingleRun, StateInfo};

/// Raw train and test corpora, loaded once and shared across repeats and
/// sweep cells.
pub struct PreparedData {
    pub train: SampleSet,
    pub test: SampleSet,
}

pub fn load_data(config: &ExperimentConfig, paths: &ResolvedPaths) -> Result<PreparedData> {
    let corpus = load_sample_set(&paths.features, &paths.labels)?;
    let (train, test) = match &paths.test {
        Some((tf, tl)) => (corpus, load_sample_set(tf, tl)?),
        None => {
            // validated: holdout_fraction is present when no test files are
            let fraction = config.data.holdout_fraction.expect("validated config");
            acil::carve_holdout(&corpus, fraction, config.holdout_seed())?
        }
    };
    if test.feature_dim() != train.feature_dim() {
        return Err(Failure::validation(format!(
            "test features are {}-wide but training features are {}-wide",
            test.feature_dim(),
            train.feature_dim()
        )));
    }
    Ok(PreparedData { train, test })
}

/// Everything a fit needs, in expanded feature space: one update per phase
/// plus the expanded test corpus.
pub struct PreparedPhases {
    pub updates: Vec<PhaseUpdate>,
    pub test_features: Array2<f64>,
    pub test_labels: Vec<u32>,
}

pub fn prepare_phases(
    config: &ExperimentConfig,
    data: &PreparedData,
    split_seed: u64,
    expansion_seed: u64,
) -> Result<PreparedPhases> {
    let extractor: Box<dyn FeatureExtractor> = match config.features.extractor {
        ExtractorKind::Identity => Box::new(IdentityExtractor),
        ExtractorKind::RandomProjection => Box::new(RandomProjectionExtractor::new(
            data.train.feature_dim(),
            config.features.extractor_width.expect("validated config"),
            config.features.extractor_seed,
        )?),
    };
    let extracted_train = extractor.extract(data.train.features())?;
    let extracted_test = extractor.extract(data.test.features())?;

    let d_in = extracted_train.ncols();
    let std = config
        .features
        .expansion_std
        .unwrap_or_else(|| FeatureExpander::default_std(d_in));
    let expander =
        FeatureExpander::new(d_in, config.features.expansion_width, expansion_seed, std)?;
    let expanded_train = expander.expand(extracted_train.view())?;
    let test_features = expander.expand(extracted_test.view())?;

    let train = SampleSet::new(expanded_train, data.train.labels().to_vec())?;
    let plan = SplitPlan::new(config.split.base_fraction, config.split.phases, split_seed)?
        .strict_even(config.split.strict_even);
    let updates = split_phases(&train, &plan)?
        .into_iter()
        .map(|p| PhaseUpdate::new(p.features, p.onehot, p.class_ids))
        .collect::<acil::Result<Vec<_>>>()?;

    Ok(PreparedPhases {
        updates,
        test_features,
        test_labels: data.test.labels().to_vec(),
    })
}

/// Run the full phased experiment once; optionally persist the final state.
pub fn run_once(
    config: &ExperimentConfig,
    data: &PreparedData,
    split_seed: u64,
    expansion_seed: u64,
    state_path: Option<&Path>,
) -> Result<SingleRun> {
    let run_start = Instant::now();
    let prepared = prepare_phases(config, data, split_seed, expansion_seed)?;

    // test rows per class, so each phase extends the evaluation union
    // without touching files again
    let mut rows_by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (row, &label) in prepared.test_labels.iter().enumerate() {
        rows_by_class.entry(label).or_default().push(row);
    }

    let mut state: Option<AnalyticState> = None;
    let mut seen_rows: Vec<usize> = Vec::new();
    let mut base_rows: Vec<usize> = Vec::new();
    let mut log = acil::PhaseAccuracyLog::new();
    let mut phases = Vec::with_capacity(prepared.updates.len());

    for (k, update) in prepared.updates.iter().enumerate() {
        let phase_start = Instant::now();
        let in_phase = |e: acil::Error| Failure::from(e).context(&format!("phase {k}"));
        match state.as_mut() {
            None => {
                state =
                    Some(AnalyticState::fit_base(update, config.learner.gamma).map_err(in_phase)?)
            }
            Some(state) => match config.learner.chunk_rows {
                Some(rows) => state.update_chunked(update, rows).map_err(in_phase)?,
                None => state.update(update).map_err(in_phase)?,
            },
        }
        let state = state.as_ref().expect("state fitted above");

        for class in update.class_ids() {
            if let Some(rows) = rows_by_class.get(class) {
                seen_rows.extend_from_slice(rows);
            }
        }
        if k == 0 {
            base_rows = seen_rows.clone();
        }
        let fail = |e: Failure| e.context(&format!("phase {k} evaluation"));
        let accuracy_seen = eval_accuracy(
            state,
            prepared.test_features.view(),
            &seen_rows,
            &prepared.test_labels,
        )
        .map_err(fail)?;
        let accuracy_base = eval_accuracy(
            state,
            prepared.test_features.view(),
            &base_rows,
            &prepared.test_labels,
        )
        .map_err(fail)?;
        log.push(accuracy_seen, accuracy_base)?;
        phases.push(PhaseEntry {
            phase: k,
            new_classes: update.class_ids().to_vec(),
            train_rows: update.n_samples(),
            test_rows: seen_rows.len(),
            accuracy_seen,
            accuracy_base,
            wall_ms: phase_start.elapsed().as_millis() as u64,
        });
    }

    let state = state.expect("split always yields a base phase");
    let average = acil::average_incremental_accuracy(&log)?;
    let forgetting = acil::forgetting_rate(&log)?;
    let all_rows: Vec<usize> = (0..prepared.test_labels.len()).collect();
    let final_full = eval_accuracy(
        &state,
        prepared.test_features.view(),
        &all_rows,
        &prepared.test_labels,
    )?;

    let state_info = match state_path {
        Some(path) => {
            state.save(path)?;
            let bytes = std::fs::metadata(path)
                .map_err(|e| Failure::validation(format!("cannot stat {}: {e}", path.display())))?
                .len();
            Some(StateInfo {
                path: path.display().to_string(),
                bytes,
            })
        }
        None => None,
    };

    Ok(SingleRun {
        split_seed,
        expansion_seed,
        phases,
        average_incremental_accuracy: average,
        forgetting: ForgettingEntry {
            signed: forgetting.signed,
            magnitude: forgetting.magnitude,
        },
        final_full_test_accuracy: final_full,
        state: state_info,
        wall_ms: run_start.elapsed().as_millis() as u64,
    })
}

/// Fit the recursive agenda and re-solve the joint problem on the same
/// expanded features, then compare.
pub fn verify_once(
    config: &ExperimentConfig,
    data: &PreparedData,
    tol: f64,
) -> Result<ComparisonReport> {
    if config.features.expansion_width > config.verify.max_expansion_width {
        return Err(Failure::validation(format!(
            "features.expansion_width {} exceeds verify.max_expansion_width {}; \
             the joint re-solve is cubic in the width, raise the cap deliberately",
            config.features.expansion_width, config.verify.max_expansion_width
        )));
    }
    let prepared = prepare_phases(
        config,
        data,
        config.split.seed,
        config.features.expansion_seed,
    )?;
    let problem = JointProblem {
        phases: prepared.updates,
        gamma: config.learner.gamma,
    };

    let mut state = AnalyticState::fit_base(&problem.phases[0], config.learner.gamma)
        .map_err(|e| Failure::from(e).context("phase 0"))?;
    for (k, update) in problem.phases.iter().enumerate().skip(1) {
        let in_phase = |e: acil::Error| Failure::from(e).context(&format!("phase {k}"));
        match config.learner.chunk_rows {
            Some(rows) => state.update_chunked(update, rows).map_err(in_phase)?,
            None => state.update(update).map_err(in_phase)?,
        }
    }

    let joint = joint_fit(&problem).map_err(|e| Failure::from(e).context("joint re-solve"))?;
    Ok(compare_states(&joint, &state, tol)?)
}

/// Fraction of `rows` whose argmax prediction matches the label; scored in
/// parallel chunks, summed deterministically.
pub fn eval_accuracy(
    state: &AnalyticState,
    test_features: ArrayView2<'_, f64>,
    rows: &[usize],
    labels: &[u32],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Failure::validation(
            "no test rows for the classes seen so far".to_string(),
        ));
    }
    let x = test_features.select(Axis(0), rows);
    let y: Vec<u32> = rows.iter().map(|&r| labels[r]).collect();

    const CHUNK: usize = 512;
    let ranges: Vec<std::ops::Range<usize>> = (0..x.nrows())
        .step_by(CHUNK)
        .map(|start| start..(start + CHUNK).min(x.nrows()))
        .collect();
    let correct = ranges
        .into_par_iter()
        .map(|range| {
            let pred = state.predict(x.slice(s![range.clone(), ..]))?;
            Ok(pred
                .labels
                .iter()
                .zip(&y[range])
                .filter(|(p, a)| p == a)
                .count())
        })
        .collect::<acil::Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / y.len() as f64)
}
