//! The TOML experiment config: schema, defaults, and validation.
//!
//! A config file fully determines an experiment (together with the feature
//! and label files it points to), so the same file run twice produces the
//! same report modulo wall-clock fields. Paths are resolved relative to the
//! config file's directory; the report echoes them exactly as written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Result};

/// Top-level config. Every section keeps its serialized form for the report
/// echo; resolved absolute paths live alongside in [`ResolvedPaths`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub split: SplitSection,
    pub features: FeatureSection,
    #[serde(default)]
    pub learner: LearnerSection,
    #[serde(default)]
    pub verify: VerifySection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Training feature file (binary or headerless CSV).
    pub features: String,
    /// Training label file (binary or one id per line).
    pub labels: String,
    /// Optional explicit test split; give both or neither.
    pub test_features: Option<String>,
    pub test_labels: Option<String>,
    /// Per-class holdout carved from the training corpus when no explicit
    /// test files are given.
    pub holdout_fraction: Option<f64>,
    /// Defaults to `split.seed`.
    pub holdout_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    /// Fraction of classes assigned to the base phase.
    #[serde(default = "default_base_fraction")]
    pub base_fraction: f64,
    /// Number of incremental phases after the base phase.
    pub phases: usize,
    /// Seed for the class-order shuffle.
    #[serde(default)]
    pub seed: u64,
    /// Reject splits whose incremental groups cannot be exactly even.
    #[serde(default)]
    pub strict_even: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    /// Frozen stage in front of the expansion; stands in for a pretrained
    /// backbone.
    #[serde(default)]
    pub extractor: ExtractorKind,
    /// Output width of the random-projection extractor.
    pub extractor_width: Option<usize>,
    #[serde(default)]
    pub extractor_seed: u64,
    /// Width of the seeded relu expansion the classifier head sees.
    pub expansion_width: usize,
    #[serde(default)]
    pub expansion_seed: u64,
    /// Std-dev of the expansion weights; defaults to 1/sqrt(input width).
    pub expansion_std: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractorKind {
    #[default]
    Identity,
    RandomProjection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    /// Ridge strength.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Rows absorbed per recursion step; unset means one step per phase.
    pub chunk_rows: Option<usize>,
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            gamma: default_gamma(),
            chunk_rows: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Max-abs weight discrepancy accepted by `acil verify`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Refuse to verify above this expansion width (the joint re-solve is
    /// cubic in it).
    #[serde(default = "default_max_width")]
    pub max_expansion_width: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            tolerance: default_tolerance(),
            max_expansion_width: default_max_width(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for reports and state files; created if missing.
    pub dir: String,
}

fn default_base_fraction() -> f64 {
    0.5
}

fn default_gamma() -> f64 {
    1e-1
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_max_width() -> usize {
    4096
}

/// Input paths resolved against the config file's directory.
#[derive(Debug, Clone)]
pub struct ResolvedPaths {
    pub features: PathBuf,
    pub labels: PathBuf,
    pub test: Option<(PathBuf, PathBuf)>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse and validate a config file.
    ///
    /// `phases_may_be_zero` relaxes the `phases >= 1` rule for commands
    /// (verification) where a base-only agenda is meaningful.
    pub fn load(path: &Path, phases_may_be_zero: bool) -> Result<(Self, ResolvedPaths)> {
        let text = fs::read_to_string(path).map_err(|e| {
            Failure::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            Failure::validation(format!("cannot parse config {}: {e}", path.display()))
        })?;
        let paths = config.validate(path, phases_may_be_zero)?;
        Ok((config, paths))
    }

    fn validate(&self, config_path: &Path, phases_may_be_zero: bool) -> Result<ResolvedPaths> {
        let bad = |msg: String| Err(Failure::validation(msg));

        if !(self.split.base_fraction > 0.0 && self.split.base_fraction <= 1.0) {
            return bad(format!(
                "split.base_fraction must be in (0, 1], got {}",
                self.split.base_fraction
            ));
        }
        if self.split.phases == 0 && !phases_may_be_zero {
            return bad(
                "split.phases must be >= 1 for a run (0 is allowed only for verification)"
                    .to_string(),
            );
        }
        if !(self.learner.gamma > 0.0 && self.learner.gamma.is_finite()) {
            return bad(format!(
                "learner.gamma must be positive and finite, got {}",
                self.learner.gamma
            ));
        }
        if self.learner.chunk_rows == Some(0) {
            return bad("learner.chunk_rows must be >= 1 when set".to_string());
        }
        if self.features.expansion_width == 0 {
            return bad("features.expansion_width must be >= 1".to_string());
        }
        if let Some(std) = self.features.expansion_std {
            if !(std > 0.0 && std.is_finite()) {
                return bad(format!(
                    "features.expansion_std must be positive and finite, got {std}"
                ));
            }
        }
        match self.features.extractor {
            ExtractorKind::Identity => {
                if self.features.extractor_width.is_some() {
                    return bad("features.extractor_width is only meaningful with extractor = \"random-projection\"".to_string());
                }
            }
            ExtractorKind::RandomProjection => {
                if self.features.extractor_width.is_none_or(|w| w == 0) {
                    return bad(
                        "extractor = \"random-projection\" needs features.extractor_width >= 1"
                            .to_string(),
                    );
                }
            }
        }
        if !(self.verify.tolerance >= 0.0 && self.verify.tolerance.is_finite()) {
            return bad(format!(
                "verify.tolerance must be >= 0 and finite, got {}",
                self.verify.tolerance
            ));
        }

        let have_test = match (&self.data.test_features, &self.data.test_labels) {
            (Some(_), Some(_)) => true,
            (None, None) => false,
            _ => {
                return bad(
                    "give both data.test_features and data.test_labels, or neither".to_string(),
                )
            }
        };
        if have_test && self.data.holdout_fraction.is_some() {
            return bad(
                "data.holdout_fraction conflicts with explicit test files; pick one test policy"
                    .to_string(),
            );
        }
        if !have_test {
            match self.data.holdout_fraction {
                None => {
                    return bad(
                        "no test policy: set data.holdout_fraction or give explicit test files"
                            .to_string(),
                    )
                }
                Some(f) if !(f > 0.0 && f < 1.0) => {
                    return bad(format!("data.holdout_fraction must be in (0, 1), got {f}"))
                }
                Some(_) => {}
            }
        }

        let base = config_path.parent().unwrap_or(Path::new("."));
        let resolve = |s: &String| -> PathBuf {
            let p = Path::new(s);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        Ok(ResolvedPaths {
            features: resolve(&self.data.features),
            labels: resolve(&self.data.labels),
            test: match (&self.data.test_features, &self.data.test_labels) {
                (Some(f), Some(l)) => Some((resolve(f), resolve(l))),
                _ => None,
            },
            output_dir: resolve(&self.output.dir),
        })
    }

    /// Holdout seed, defaulting to the split seed so one knob reseeds the
    /// whole data path.
    pub fn holdout_seed(&self) -> u64 {
        self.data.holdout_seed.unwrap_or(self.split.seed)
    }
}
