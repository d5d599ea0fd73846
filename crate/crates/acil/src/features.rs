//! Frozen feature pipeline: an optional extractor stage followed by random
//! expansion.
//!
//! The expansion maps d_cnn-dimensional inputs to a wider d_fe-dimensional
//! space via `relu(X · W)`, where `W` is drawn once from a seeded Gaussian
//! and never trained. Widening the regression basis this way is what gives
//! the analytic head room to separate classes; the classifier itself stays
//! linear in the expanded space. Extractors model the (also frozen) backbone
//! in front of the expansion and may narrow.

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A frozen map from raw inputs to backbone features.
pub trait FeatureExtractor {
    /// Maps an N x d_in matrix to N x d_out. Must be deterministic.
    fn extract(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>>;
}

/// Passes features through untouched (inputs are already backbone outputs).
#[derive(Debug, Clone, Default)]
pub struct IdentityExtractor;

impl FeatureExtractor for IdentityExtractor {
    fn extract(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(x.to_owned())
    }
}

/// A seeded Gaussian projection with relu, standing in for a frozen
/// backbone. Unlike the expansion stage it may reduce dimensionality.
#[derive(Debug, Clone)]
pub struct RandomProjectionExtractor {
    weights: Array2<f64>,
}

impl RandomProjectionExtractor {
    pub fn new(input_dim: usize, output_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidParameter(
                "projection dimensions must be at least 1".into(),
            ));
        }
        let std = 1.0 / (input_dim as f64).sqrt();
        Ok(Self {
            weights: gaussian_matrix(input_dim, output_dim, seed, std),
        })
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }
}

impl FeatureExtractor for RandomProjectionExtractor {
    fn extract(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        relu_project(x, self.weights.view(), "projection input")
    }
}

/// The random expansion stage: `relu(X · W)` with `W` a frozen d_cnn x d_fe
/// Gaussian draw, d_cnn <= d_fe.
#[derive(Debug, Clone)]
pub struct FeatureExpander {
    weights: Array2<f64>,
}

impl FeatureExpander {
    /// The default weight scale, `1 / sqrt(d_cnn)`, which keeps the expanded
    /// activations on the same order as the inputs.
    pub fn default_std(d_cnn: usize) -> f64 {
        1.0 / (d_cnn as f64).sqrt()
    }

    /// Draws the frozen expansion weights from `Normal(0, std^2)` using the
    /// given seed. Requires `1 <= d_cnn <= d_fe` and a positive, finite std.
    pub fn new(d_cnn: usize, d_fe: usize, seed: u64, std: f64) -> Result<Self> {
        if d_cnn == 0 {
            return Err(Error::InvalidParameter(
                "input width d_cnn must be at least 1".into(),
            ));
        }
        if d_fe < d_cnn {
            return Err(Error::InvalidParameter(format!(
                "expansion must not narrow: d_fe = {d_fe} < d_cnn = {d_cnn}"
            )));
        }
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expansion weight std must be positive and finite, got {std}"
            )));
        }
        Ok(Self {
            weights: gaussian_matrix(d_cnn, d_fe, seed, std),
        })
    }

    /// Builds an expander around explicit weights (mainly for tests and
    /// reproducing external setups). The width constraint still applies.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() < weights.nrows() {
            return Err(Error::InvalidParameter(format!(
                "expansion weights must be d_cnn x d_fe with d_cnn <= d_fe, got {} x {}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        Ok(Self { weights })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    /// Expands N x d_cnn features to N x d_fe.
    pub fn expand(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        relu_project(x, self.weights.view(), "expansion input")
    }

    /// Runs the extractor stage, then expands its output.
    pub fn extract_and_expand(
        &self,
        extractor: &dyn FeatureExtractor,
        x: ArrayView2<'_, f64>,
    ) -> Result<Array2<f64>> {
        let backbone = extractor.extract(x)?;
        self.expand(backbone.view())
    }
}

/// Draws a rows x cols matrix from `Normal(0, std^2)`, filled row-major so
/// the layout (and thus every downstream number) is pinned by the seed.
fn gaussian_matrix(rows: usize, cols: usize, seed: u64, std: f64) -> Array2<f64> {
    let normal = Normal::new(0.0, std).expect("std checked by caller");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
    Array2::from_shape_vec((rows, cols), values).expect("length matches shape")
}

fn relu_project(x: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>, what: &str) -> Result<Array2<f64>> {
    if x.ncols() != w.nrows() {
        return Err(Error::DimensionMismatch {
            what: what.into(),
            expected: w.nrows(),
            actual: x.ncols(),
        });
    }
    let mut out = x.dot(&w);
    out.mapv_inplace(|v| v.max(0.0));
    Ok(out)
}
