//! Sample sets and their partition into a base phase plus incremental phases.
//!
//! A [`SampleSet`] is the flat (features, labels) view of a corpus. A
//! [`SplitPlan`] carves its classes into phase 0 (the base phase, holding a
//! configured fraction of all classes) followed by `K` incremental phases
//! with near-even, pairwise-disjoint class groups. Each resulting
//! [`PhaseDataset`] carries its own one-hot label matrix whose columns are
//! ordered by the phase's class ids.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A labelled corpus: row-major feature matrix plus one class id per row.
#[derive(Debug, Clone)]
pub struct SampleSet {
    features: Array2<f64>,
    labels: Vec<u32>,
    class_universe: Vec<u32>,
}

impl SampleSet {
    /// Validates shapes and finiteness and derives the sorted class universe.
    pub fn new(features: Array2<f64>, labels: Vec<u32>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::RowCountMismatch {
                features: features.nrows(),
                labels: labels.len(),
            });
        }
        if features.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "feature dimension must be at least 1".into(),
            ));
        }
        check_finite(features.view(), "sample features")?;
        let mut class_universe: Vec<u32> = labels.clone();
        class_universe.sort_unstable();
        class_universe.dedup();
        Ok(Self {
            features,
            labels,
            class_universe,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Distinct class ids, ascending.
    pub fn class_universe(&self) -> &[u32] {
        &self.class_universe
    }

    /// The rows whose label is in `classes`, in original order.
    pub fn filter_by_classes(&self, classes: &[u32]) -> SampleSet {
        let keep: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| classes.contains(l))
            .map(|(i, _)| i)
            .collect();
        let features = self.features.select(Axis(0), &keep);
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        SampleSet::new(features, labels).expect("filtered subset stays valid")
    }
}

/// How to carve a class universe into phase 0 plus `phases` increments.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    /// Fraction of all classes assigned to the base phase.
    pub base_fraction: f64,
    /// Number of incremental phases after the base phase.
    pub phases: usize,
    /// Seed for the class-order shuffle.
    pub seed: u64,
    /// Reject splits whose incremental groups are not all the same size.
    pub strict_even: bool,
}

impl SplitPlan {
    pub fn new(base_fraction: f64, phases: usize, seed: u64) -> Result<Self> {
        if !(base_fraction > 0.0 && base_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "base_fraction must be in (0, 1], got {base_fraction}"
            )));
        }
        Ok(Self {
            base_fraction,
            phases,
            seed,
            strict_even: false,
        })
    }

    pub fn strict_even(mut self, strict: bool) -> Self {
        self.strict_even = strict;
        self
    }
}

/// One phase's samples: features plus the one-hot labels for the classes
/// this phase introduces.
#[derive(Debug, Clone)]
pub struct PhaseDataset {
    /// 0 for the base phase, 1..=K for increments.
    pub phase_index: usize,
    /// N_k x d feature rows.
    pub features: Array2<f64>,
    /// N_k x d_y one-hot labels; column j corresponds to `class_ids[j]`.
    pub onehot: Array2<f64>,
    /// Global class ids introduced by this phase, in column order.
    pub class_ids: Vec<u32>,
}

impl PhaseDataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }
}

/// One-hot encodes `labels` against the ordered class list.
///
/// Output is N x |class_ids| with a single 1.0 per row, at the column of the
/// row's label.
pub fn one_hot(labels: &[u32], class_ids: &[u32]) -> Result<Array2<f64>> {
    let col_of: BTreeMap<u32, usize> = class_ids.iter().enumerate().map(|(j, &c)| (c, j)).collect();
    let mut out = Array2::<f64>::zeros((labels.len(), class_ids.len()));
    for (i, &label) in labels.iter().enumerate() {
        let j = col_of
            .get(&label)
            .ok_or(Error::LabelOutsideClassSet { label })?;
        out[(i, *j)] = 1.0;
    }
    Ok(out)
}

/// Partitions `data` into phase 0 (base classes) plus `plan.phases`
/// incremental phases.
///
/// Classes are shuffled by `plan.seed` and assigned contiguously: the first
/// `floor(base_fraction * n)` go to the base phase, the rest spread over the
/// incremental phases with group sizes differing by at most one. When the
/// remainder is smaller than the phase count the trailing phases come out
/// empty, which downstream learners treat as no-op updates. Strict-even mode
/// instead rejects any split whose groups are unequal.
pub fn split_phases(data: &SampleSet, plan: &SplitPlan) -> Result<Vec<PhaseDataset>> {
    let n_classes = data.class_universe().len();
    if n_classes < plan.phases + 1 {
        return Err(Error::TooFewClasses {
            classes: n_classes,
            needed: plan.phases + 1,
        });
    }
    let base_count = (plan.base_fraction * n_classes as f64).floor() as usize;
    if base_count == 0 {
        return Err(Error::TooFewClasses {
            classes: n_classes,
            needed: 1,
        });
    }
    let remaining = n_classes - base_count;
    if plan.phases == 0 && remaining > 0 {
        return Err(Error::InvalidParameter(format!(
            "a split with no incremental phases must assign every class to the \
             base phase; base_fraction {} leaves {remaining} classes unassigned",
            plan.base_fraction
        )));
    }
    if plan.strict_even && plan.phases > 0 && !remaining.is_multiple_of(plan.phases) {
        return Err(Error::UnevenSplit {
            remaining,
            phases: plan.phases,
        });
    }

    let mut order = data.class_universe().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    order.shuffle(&mut rng);

    let mut groups: Vec<Vec<u32>> = Vec::with_capacity(plan.phases + 1);
    groups.push(order[..base_count].to_vec());
    let mut offset = base_count;
    for k in 0..plan.phases {
        let size = remaining / plan.phases + usize::from(k < remaining % plan.phases);
        groups.push(order[offset..offset + size].to_vec());
        offset += size;
    }

    let mut phases = Vec::with_capacity(groups.len());
    for (phase_index, class_ids) in groups.into_iter().enumerate() {
        let subset = data.filter_by_classes(&class_ids);
        for &c in &class_ids {
            if !subset.labels().contains(&c) {
                return Err(Error::EmptyClass { class: c });
            }
        }
        let onehot = one_hot(subset.labels(), &class_ids)?;
        phases.push(PhaseDataset {
            phase_index,
            features: subset.features,
            onehot,
            class_ids,
        });
    }
    Ok(phases)
}

/// Checks that no class id appears in two phases.
///
/// Reports the first duplicate together with both phase indices.
pub fn validate_disjoint(phases: &[PhaseDataset]) -> Result<()> {
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    for phase in phases {
        for &class in &phase.class_ids {
            if let Some(&first) = seen.get(&class) {
                return Err(Error::OverlappingClasses {
                    class,
                    first,
                    second: phase.phase_index,
                });
            }
            seen.insert(class, phase.phase_index);
        }
    }
    Ok(())
}

/// Splits `data` into (train, test) by a seeded per-class holdout.
///
/// Each class contributes `floor(fraction * count)` rows to the test side,
/// chosen by the seeded shuffle, so every class keeps at least one training
/// row. Used when no separate test corpus is supplied.
pub fn carve_holdout(data: &SampleSet, fraction: f64, seed: u64) -> Result<(SampleSet, SampleSet)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction must be in [0, 1), got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_rows: Vec<usize> = Vec::new();
    for &class in data.class_universe() {
        let mut rows: Vec<usize> = data
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        rows.shuffle(&mut rng);
        let n_test = (fraction * rows.len() as f64).floor() as usize;
        if n_test >= rows.len() {
            return Err(Error::EmptyClass { class });
        }
        test_rows.extend_from_slice(&rows[..n_test]);
    }
    test_rows.sort_unstable();
    let is_test: Vec<bool> = {
        let mut mask = vec![false; data.n_samples()];
        for &i in &test_rows {
            mask[i] = true;
        }
        mask
    };
    let train_rows: Vec<usize> = (0..data.n_samples()).filter(|&i| !is_test[i]).collect();

    let pick = |rows: &[usize]| -> SampleSet {
        let features = data.features.select(Axis(0), rows);
        let labels = rows.iter().map(|&i| data.labels[i]).collect();
        SampleSet::new(features, labels).expect("holdout subset stays valid")
    };
    Ok((pick(&train_rows), pick(&test_rows)))
}

pub(crate) fn check_finite(m: ArrayView2<'_, f64>, what: &str) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: what.into(),
                row,
                col,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy_set(n_classes: u32, per_class: usize) -> SampleSet {
        let n = n_classes as usize * per_class;
        let mut labels = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n * 2);
        for c in 0..n_classes {
            for k in 0..per_class {
                labels.push(c);
                rows.push(c as f64);
                rows.push(k as f64);
            }
        }
        let features = Array2::from_shape_vec((n, 2), rows).unwrap();
        SampleSet::new(features, labels).unwrap()
    }

    #[test]
    fn sample_set_derives_universe() {
        let features = array![
            [0.0, 1.0, 2.0],
            [1.0, 1.0, 1.0],
            [2.0, 0.0, 0.0],
            [3.0, 1.0, 0.0]
        ];
        let set = SampleSet::new(features, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(set.class_universe(), &[0, 1]);
        assert_eq!(set.feature_dim(), 3);
    }

    #[test]
    fn sample_set_rejects_row_mismatch() {
        let features = Array2::<f64>::zeros((4, 3));
        let err = SampleSet::new(features, vec![0, 0, 1, 1, 1]).unwrap_err();
        assert!(err.to_string().contains("row-count mismatch"));
    }

    #[test]
    fn sample_set_rejects_non_finite() {
        let features = array![[0.0, f64::NAN], [1.0, 1.0]];
        assert!(matches!(
            SampleSet::new(features, vec![0, 1]),
            Err(Error::NonFinite { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn one_hot_basic() {
        let m = one_hot(&[2, 0], &[0, 1, 2]).unwrap();
        assert_eq!(m, array![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn one_hot_empty_labels() {
        let m = one_hot(&[], &[0, 1]).unwrap();
        assert_eq!(m.dim(), (0, 2));
    }

    #[test]
    fn one_hot_respects_class_order() {
        let m = one_hot(&[5, 5, 7], &[5, 7]).unwrap();
        assert_eq!(m, array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn one_hot_rejects_unknown_label() {
        assert!(matches!(
            one_hot(&[3], &[0, 1]),
            Err(Error::LabelOutsideClassSet { label: 3 })
        ));
    }

    #[test]
    fn split_half_base_then_singletons() {
        let data = toy_set(10, 3);
        let plan = SplitPlan::new(0.5, 5, 7).unwrap();
        let phases = split_phases(&data, &plan).unwrap();
        assert_eq!(phases.len(), 6);
        assert_eq!(phases[0].n_classes(), 5);
        for p in &phases[1..] {
            assert_eq!(p.n_classes(), 1);
            assert_eq!(p.n_samples(), 3);
        }
        validate_disjoint(&phases).unwrap();
        let total: usize = phases.iter().map(|p| p.n_classes()).sum();
        assert_eq!(total, 10);
    }

    #[test]
    fn split_hundred_classes_over_25_phases() {
        let data = toy_set(100, 1);
        let plan = SplitPlan::new(0.5, 25, 0).unwrap();
        let phases = split_phases(&data, &plan).unwrap();
        assert_eq!(phases[0].n_classes(), 50);
        assert!(phases[1..].iter().all(|p| p.n_classes() == 2));
    }

    #[test]
    fn strict_even_rejects_indivisible_remainder() {
        // 7 classes with one base class leaves 6: fine over 6 phases,
        // impossible to split evenly over 4.
        let data = toy_set(7, 2);
        let ok_plan = SplitPlan::new(1.0 / 7.0, 6, 0).unwrap().strict_even(true);
        assert!(split_phases(&data, &ok_plan).is_ok());

        let bad_plan = SplitPlan::new(1.0 / 7.0, 4, 0).unwrap().strict_even(true);
        assert!(matches!(
            split_phases(&data, &bad_plan),
            Err(Error::UnevenSplit {
                remaining: 6,
                phases: 4
            })
        ));
        // tolerant mode spreads 6 classes over 4 phases as 2/2/1/1
        let tolerant = SplitPlan::new(1.0 / 7.0, 4, 0).unwrap();
        let phases = split_phases(&data, &tolerant).unwrap();
        let sizes: Vec<usize> = phases[1..].iter().map(|p| p.n_classes()).collect();
        assert_eq!(sizes, vec![2, 2, 1, 1]);
    }

    #[test]
    fn too_few_classes_is_rejected() {
        let data = toy_set(3, 2);
        let plan = SplitPlan::new(0.5, 3, 0).unwrap();
        assert!(matches!(
            split_phases(&data, &plan),
            Err(Error::TooFewClasses {
                classes: 3,
                needed: 4
            })
        ));
    }

    #[test]
    fn split_is_deterministic_and_partitions_rows() {
        let data = toy_set(9, 4);
        let plan = SplitPlan::new(0.5, 2, 42).unwrap();
        let a = split_phases(&data, &plan).unwrap();
        let b = split_phases(&data, &plan).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.class_ids, pb.class_ids);
            assert_eq!(pa.features, pb.features);
        }
        let total_rows: usize = a.iter().map(|p| p.n_samples()).sum();
        assert_eq!(total_rows, data.n_samples());
    }

    #[test]
    fn validate_disjoint_reports_overlap() {
        let mk = |idx, ids: Vec<u32>| PhaseDataset {
            phase_index: idx,
            features: Array2::zeros((0, 2)),
            onehot: Array2::zeros((0, ids.len())),
            class_ids: ids,
        };
        validate_disjoint(&[mk(0, vec![0, 1]), mk(1, vec![2, 3])]).unwrap();
        validate_disjoint(&[mk(0, vec![0, 1])]).unwrap();
        let err = validate_disjoint(&[mk(0, vec![0, 1]), mk(1, vec![1, 2])]).unwrap_err();
        assert!(matches!(
            err,
            Error::OverlappingClasses {
                class: 1,
                first: 0,
                second: 1
            }
        ));
    }

    #[test]
    fn holdout_is_stratified_and_seeded() {
        let data = toy_set(5, 10);
        let (train, test) = carve_holdout(&data, 0.2, 3).unwrap();
        assert_eq!(train.n_samples(), 40);
        assert_eq!(test.n_samples(), 10);
        assert_eq!(train.class_universe(), data.class_universe());
        assert_eq!(test.class_universe(), data.class_universe());

        let (train2, test2) = carve_holdout(&data, 0.2, 3).unwrap();
        assert_eq!(train.features(), train2.features());
        assert_eq!(test.labels(), test2.labels());
    }

    #[test]
    fn holdout_keeps_singleton_classes_in_train() {
        let data = toy_set(3, 1);
        let (train, test) = carve_holdout(&data, 0.5, 0).unwrap();
        assert_eq!(train.n_samples(), 3);
        assert_eq!(test.n_samples(), 0);
    }
}
