//! Accuracy bookkeeping across phases: per-phase accuracy, its average, and
//! how much base-class accuracy drifts by the final phase.

use crate::error::{Error, Result};

/// Fraction of rows whose predicted class id matches the true one.
pub fn phase_accuracy(predicted: &[u32], actual: &[u32]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            what: "predicted versus actual label count".into(),
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput("accuracy over zero rows".into()));
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Accuracies recorded after each phase: on the union of test classes seen
/// so far, and on the base phase's test set alone.
#[derive(Debug, Clone, Default)]
pub struct PhaseAccuracyLog {
    seen: Vec<f64>,
    base: Vec<f64>,
}

impl PhaseAccuracyLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one phase's pair of accuracies; both must lie in [0, 1].
    pub fn push(&mut self, seen: f64, base: f64) -> Result<()> {
        for (name, v) in [("seen", seen), ("base", base)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} accuracy {v} is outside [0, 1]"
                )));
            }
        }
        self.seen.push(seen);
        self.base.push(base);
        Ok(())
    }

    /// Accuracy on all classes seen up to each phase, indexed by phase.
    pub fn seen(&self) -> &[f64] {
        &self.seen
    }

    /// Accuracy on the base test set after each phase.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Mean of the per-phase seen-classes accuracies.
pub fn average_incremental_accuracy(log: &PhaseAccuracyLog) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::EmptyInput("no phase accuracies recorded".into()));
    }
    Ok(log.seen().iter().sum::<f64>() / log.len() as f64)
}

/// Drift of base-class accuracy from the first phase to the last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forgetting {
    /// Final base accuracy minus initial base accuracy (negative when the
    /// base classes got worse).
    pub signed: f64,
    /// Absolute value of `signed`.
    pub magnitude: f64,
}

/// Computes base-accuracy drift; needs the base phase plus at least one
/// incremental phase in the log.
pub fn forgetting_rate(log: &PhaseAccuracyLog) -> Result<Forgetting> {
    if log.len() < 2 {
        return Err(Error::EmptyInput(
            "forgetting needs at least one incremental phase".into(),
        ));
    }
    let signed = log.base()[log.len() - 1] - log.base()[0];
    Ok(Forgetting {
        signed,
        magnitude: signed.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(phase_accuracy(&[1, 2, 3, 4], &[1, 2, 0, 4]).unwrap(), 0.75);
        assert_eq!(phase_accuracy(&[5], &[5]).unwrap(), 1.0);
        assert_eq!(phase_accuracy(&[5], &[6]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_empty_and_mismatched() {
        assert!(matches!(
            phase_accuracy(&[], &[]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            phase_accuracy(&[1], &[1, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn log_rejects_out_of_range() {
        let mut log = PhaseAccuracyLog::new();
        assert!(log.push(1.2, 0.5).is_err());
        assert!(log.push(0.5, -0.1).is_err());
        assert!(log.push(0.0, 1.0).is_ok());
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn average_is_the_mean_of_seen() {
        let mut log = PhaseAccuracyLog::new();
        log.push(0.9, 0.9).unwrap();
        log.push(0.8, 0.85).unwrap();
        log.push(0.7, 0.8).unwrap();
        let avg = average_incremental_accuracy(&log).unwrap();
        assert!((avg - 0.8).abs() < 1e-15);
    }

    #[test]
    fn forgetting_is_last_base_minus_first() {
        let mut log = PhaseAccuracyLog::new();
        log.push(0.9, 0.9).unwrap();
        log.push(0.85, 0.82).unwrap();
        let f = forgetting_rate(&log).unwrap();
        assert!((f.signed - (0.82 - 0.9)).abs() < 1e-15);
        assert!((f.magnitude - 0.08).abs() < 1e-12);
    }

    #[test]
    fn forgetting_needs_an_increment() {
        let mut log = PhaseAccuracyLog::new();
        assert!(forgetting_rate(&log).is_err());
        log.push(0.9, 0.9).unwrap();
        assert!(forgetting_rate(&log).is_err());
        log.push(0.9, 0.9).unwrap();
        let f = forgetting_rate(&log).unwrap();
        assert_eq!(f.signed, 0.0);
    }
}
