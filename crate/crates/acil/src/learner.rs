//! The analytic classifier head and its exactly-recursive phase updates.
//!
//! [`AnalyticState`] holds the ridge solution `W` over every sample absorbed
//! so far together with the regularized inverse autocorrelation
//! `R = (sum of X_iᵀX_i + gamma·I)⁻¹`. `R` is what makes recursion exact:
//! absorbing a new batch `(X, Y)` rewrites both matrices in closed form,
//!
//! ```text
//! R' = (R⁻¹ + XᵀX)⁻¹          W' = W + R'·Xᵀ·(Y − X·W)
//! ```
//!
//! which reproduces, to rounding error, the ridge solution that a joint fit
//! over all raw data would give — no training rows are retained. New classes
//! enter as zero columns of `W` before their first batch; `Y` is the
//! full-width one-hot block (zeros in previously seen class columns).
//!
//! The `R` rewrite has two algebraically equal routes and the cheaper one is
//! chosen per batch: a direct d x d refactorization, or the low-rank
//! downdate `R' = R − R·Xᵀ·(I + X·R·Xᵀ)⁻¹·X·R` whose inner solve is only
//! N x N. Batches larger than a chunk limit are absorbed in row slices,
//! which leaves the result unchanged (each slice is just another batch).

use ndarray::{s, Array2, ArrayView2, Axis};
use std::fs;
use std::path::Path;

use crate::dataset::check_finite;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, symmetrize};

/// Row-slice size used by [`AnalyticState::update`] when absorbing a phase.
pub const DEFAULT_CHUNK_ROWS: usize = 4096;

const STATE_MAGIC: &[u8; 8] = b"ACILSTAT";
const STATE_VERSION: u32 = 1;
const CRC64: crc::Crc<u64> = crc::Crc::<u64>::new(&crc::CRC_64_XZ);

/// One phase's training data in expanded-feature space.
#[derive(Debug, Clone)]
pub struct PhaseUpdate {
    features: Array2<f64>,
    onehot: Array2<f64>,
    class_ids: Vec<u32>,
}

impl PhaseUpdate {
    /// Validates that `features` (N x d_fe) and `onehot` (N x d_y) agree on
    /// N, that `onehot` has one column per entry of `class_ids`, that the
    /// ids are distinct, and that all values are finite.
    pub fn new(features: Array2<f64>, onehot: Array2<f64>, class_ids: Vec<u32>) -> Result<Self> {
        if features.nrows() != onehot.nrows() {
            return Err(Error::DimensionMismatch {
                what: "one-hot rows versus feature rows".into(),
                expected: features.nrows(),
                actual: onehot.nrows(),
            });
        }
        if onehot.ncols() != class_ids.len() {
            return Err(Error::DimensionMismatch {
                what: "one-hot columns versus class ids".into(),
                expected: class_ids.len(),
                actual: onehot.ncols(),
            });
        }
        let mut sorted = class_ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateClass { class: w[0] });
        }
        check_finite(features.view(), "phase features")?;
        check_finite(onehot.view(), "phase one-hot labels")?;
        Ok(Self {
            features,
            onehot,
            class_ids,
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

    pub fn onehot(&self) -> ArrayView2<'_, f64> {
        self.onehot.view()
    }

    pub fn class_ids(&self) -> &[u32] {
        &self.class_ids
    }
}

/// Per-row class decisions plus the raw score matrix they came from.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Winning class id per row; score ties go to the earliest-registered
    /// class.
    pub labels: Vec<u32>,
    /// N x C linear scores, columns in registry order.
    pub scores: Array2<f64>,
}

/// The classifier head: ridge weights plus the regularized inverse
/// autocorrelation that lets later phases update them exactly.
#[derive(Debug, Clone)]
pub struct AnalyticState {
    /// d_fe x C ridge weights; column j scores `class_registry[j]`.
    weights: Array2<f64>,
    /// d_fe x d_fe inverse of (accumulated XᵀX + gamma·I).
    autocorr: Array2<f64>,
    /// Class ids in the order their columns were added.
    class_registry: Vec<u32>,
    gamma: f64,
    /// Number of incremental updates absorbed after the base fit.
    phase_count: u32,
}

impl AnalyticState {
    /// Solves the base-phase ridge problem
    /// `W = (XᵀX + gamma·I)⁻¹ XᵀY` and stores the inverse as the recursion
    /// carrier.
    pub fn fit_base(base: &PhaseUpdate, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        if base.n_samples() == 0 {
            return Err(Error::EmptyInput("base phase has no samples".into()));
        }
        if base.class_ids.is_empty() {
            return Err(Error::EmptyInput("base phase has no classes".into()));
        }
        let x = base.features();
        let d = x.ncols();
        let mut gram = x.t().dot(&x);
        for i in 0..d {
            gram[(i, i)] += gamma;
        }
        symmetrize(&mut gram);
        let chol = cholesky(gram.view())?;
        let xty = x.t().dot(&base.onehot());
        let weights = chol.solve(xty.view())?;
        let mut autocorr = chol.inverse();
        symmetrize(&mut autocorr);
        Ok(Self {
            weights,
            autocorr,
            class_registry: base.class_ids.clone(),
            gamma,
            phase_count: 0,
        })
    }

    /// Absorbs one incremental phase, slicing it into
    /// [`DEFAULT_CHUNK_ROWS`]-row batches.
    pub fn update(&mut self, phase: &PhaseUpdate) -> Result<()> {
        self.update_chunked(phase, DEFAULT_CHUNK_ROWS)
    }

    /// Absorbs one incremental phase in row slices of at most `chunk_rows`.
    ///
    /// The phase's classes must be new; its columns are appended to the
    /// registry (zero-initialized) before any rows are absorbed, so an empty
    /// phase still registers classes and counts as a phase. The result is
    /// independent of `chunk_rows`.
    pub fn update_chunked(&mut self, phase: &PhaseUpdate, chunk_rows: usize) -> Result<()> {
        if chunk_rows == 0 {
            return Err(Error::InvalidParameter(
                "chunk_rows must be at least 1".into(),
            ));
        }
        if phase.feature_dim() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                what: "phase feature width".into(),
                expected: self.feature_dim(),
                actual: phase.feature_dim(),
            });
        }
        for &class in &phase.class_ids {
            if self.class_registry.contains(&class) {
                return Err(Error::DuplicateClass { class });
            }
        }

        let d = self.feature_dim();
        let old_c = self.class_registry.len();
        let new_c = phase.class_ids.len();
        let mut widened = Array2::<f64>::zeros((d, old_c + new_c));
        widened.slice_mut(s![.., ..old_c]).assign(&self.weights);
        self.weights = widened;
        self.class_registry.extend_from_slice(&phase.class_ids);

        let n = phase.n_samples();
        let mut start = 0;
        while start < n {
            let end = (start + chunk_rows).min(n);
            let x = phase.features.slice(s![start..end, ..]);
            // full-width targets: zeros for already-seen classes, the
            // phase's one-hot block for the new ones
            let mut y = Array2::<f64>::zeros((end - start, old_c + new_c));
            y.slice_mut(s![.., old_c..])
                .assign(&phase.onehot.slice(s![start..end, ..]));

            self.absorb_batch(x, y.view())?;
            start = end;
        }
        self.phase_count += 1;
        Ok(())
    }

    /// Rewrites `(R, W)` for one batch: first the autocorrelation, then the
    /// weights against the already-updated `R`.
    fn absorb_batch(&mut self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<()> {
        let n = x.nrows();
        let d = self.feature_dim();
        if n == 0 {
            return Ok(());
        }
        if n <= d {
            // low-rank route: R' = R − R·Xᵀ·(I + X·R·Xᵀ)⁻¹·X·R, inner
            // solve is N x N
            let t = x.dot(&self.autocorr); // X·R (= (R·Xᵀ)ᵀ since R is symmetric)
            let mut k = t.dot(&x.t());
            for i in 0..n {
                k[(i, i)] += 1.0;
            }
            symmetrize(&mut k);
            let z = cholesky(k.view())?.solve(t.view())?;
            self.autocorr -= &t.t().dot(&z);
        } else {
            // dense route: refactorize R' = (R⁻¹ + XᵀX)⁻¹
            let mut gram = cholesky(self.autocorr.view())?.inverse();
            gram += &x.t().dot(&x);
            symmetrize(&mut gram);
            self.autocorr = cholesky(gram.view())?.inverse();
        }
        symmetrize(&mut self.autocorr);

        let residual = &y - &x.dot(&self.weights);
        self.weights += &self.autocorr.dot(&x.t().dot(&residual));
        Ok(())
    }

    /// Scores expanded features and picks each row's best class. Ties go to
    /// the earliest-registered class.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Prediction> {
        if x.ncols() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                what: "prediction feature width".into(),
                expected: self.feature_dim(),
                actual: x.ncols(),
            });
        }
        let scores = x.dot(&self.weights);
        let labels = scores
            .axis_iter(Axis(0))
            .map(|row| {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = j;
                    }
                }
                self.class_registry[best]
            })
            .collect();
        Ok(Prediction { labels, scores })
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.class_registry.len()
    }

    pub fn class_registry(&self) -> &[u32] {
        &self.class_registry
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phase_count(&self) -> u32 {
        self.phase_count
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn autocorr(&self) -> ArrayView2<'_, f64> {
        self.autocorr.view()
    }

    /// Serializes the state (see the format notes on [`AnalyticState`]
    /// persistence): magic, version, gamma, dimensions, class registry,
    /// `W`, `R`, and a trailing CRC-64 of everything before it.
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.feature_dim();
        let c = self.class_registry.len();
        let mut out = Vec::with_capacity(32 + 4 * c + 8 * (d * c + d * d) + 8);
        out.extend_from_slice(STATE_MAGIC);
        out.extend_from_slice(&STATE_VERSION.to_le_bytes());
        out.extend_from_slice(&self.gamma.to_le_bytes());
        out.extend_from_slice(&(d as u32).to_le_bytes());
        out.extend_from_slice(&(c as u32).to_le_bytes());
        out.extend_from_slice(&self.phase_count.to_le_bytes());
        for &id in &self.class_registry {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for &v in self.weights.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &v in self.autocorr.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = CRC64.checksum(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Deserializes a state produced by [`AnalyticState::to_bytes`].
    ///
    /// Checks, in order: minimum length, magic, version, then the CRC over
    /// the whole payload — so any truncation or bit flip surfaces as a
    /// checksum error before field parsing begins.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const HEAD: usize = 8 + 4; // magic + version
        if bytes.len() < HEAD + 8 {
            return Err(Error::CorruptState(format!(
                "{} bytes is too short to be a state file",
                bytes.len()
            )));
        }
        if &bytes[..8] != STATE_MAGIC {
            return Err(Error::CorruptState("magic bytes missing".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != STATE_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: STATE_VERSION,
            });
        }
        let (payload, trailer) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(trailer.try_into().unwrap());
        let computed = CRC64.checksum(payload);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }

        let mut pos = HEAD;
        let f64_at = |p: &mut usize| -> Result<f64> {
            let v = payload
                .get(*p..*p + 8)
                .ok_or_else(|| Error::CorruptState("payload ends inside a value".into()))?;
            *p += 8;
            Ok(f64::from_le_bytes(v.try_into().unwrap()))
        };
        let gamma = f64_at(&mut pos)?;
        let u32_at = |p: &mut usize| -> Result<u32> {
            let v = payload
                .get(*p..*p + 4)
                .ok_or_else(|| Error::CorruptState("payload ends inside a value".into()))?;
            *p += 4;
            Ok(u32::from_le_bytes(v.try_into().unwrap()))
        };
        let d = u32_at(&mut pos)? as usize;
        let c = u32_at(&mut pos)? as usize;
        let phase_count = u32_at(&mut pos)?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::CorruptState(format!("gamma {gamma} is invalid")));
        }
        let expected_len = HEAD + 8 + 4 + 4 + 4 + 4 * c + 8 * (d * c + d * d);
        if payload.len() != expected_len {
            return Err(Error::CorruptState(format!(
                "payload is {} bytes, header implies {expected_len}",
                payload.len()
            )));
        }
        let mut class_registry = Vec::with_capacity(c);
        for _ in 0..c {
            class_registry.push(u32_at(&mut pos)?);
        }
        let mut sorted = class_registry.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::CorruptState("duplicate class id in registry".into()));
        }
        let mut read_matrix = |rows: usize, cols: usize, what: &str| -> Result<Array2<f64>> {
            let mut values = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                let v = f64_at(&mut pos)?;
                if !v.is_finite() {
                    return Err(Error::CorruptState(format!("non-finite value in {what}")));
                }
                values.push(v);
            }
            Ok(Array2::from_shape_vec((rows, cols), values).expect("length matches shape"))
        };
        let weights = read_matrix(d, c, "weights")?;
        let autocorr = read_matrix(d, d, "autocorrelation")?;
        Ok(Self {
            weights,
            autocorr,
            class_registry,
            gamma,
            phase_count,
        })
    }

    /// Writes [`AnalyticState::to_bytes`] to a file.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads a state file written by [`AnalyticState::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
