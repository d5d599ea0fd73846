//! Shared helpers for the integration suites: an independent dense ridge
//! solver to check the crate against, deterministic data generators, and the
//! digits fixture loader.

#![allow(dead_code)] // each test binary uses its own subset

use acil::SampleSet;
use ndarray::{Array2, ArrayView2};
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

/// Solves `(XᵀX + gamma·I) W = XᵀY` by Gauss-Jordan elimination with partial
/// pivoting, entirely on plain vectors. This is the reference the crate's
/// Cholesky-based solver is measured against, so it deliberately shares no
/// code with it.
pub fn naive_ridge(x: &[Vec<f64>], y: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    assert_eq!(x.len(), y.len(), "row counts must agree");
    let d = x[0].len();
    let c = y[0].len();

    let mut a = vec![vec![0.0f64; d]; d];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = gamma;
    }
    for row in x {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    let mut b = vec![vec![0.0f64; c]; d];
    for (row, targets) in x.iter().zip(y) {
        for i in 0..d {
            for j in 0..c {
                b[i][j] += row[i] * targets[j];
            }
        }
    }
    gauss_jordan_solve(a, b)
}

/// Solves `A X = B` by Gauss-Jordan elimination with partial pivoting, on
/// plain vectors.
pub fn gauss_jordan_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let d = a.len();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pv = a[col][col];
        assert!(pv != 0.0, "reference system is singular");
        for v in &mut a[col] {
            *v /= pv;
        }
        for v in &mut b[col] {
            *v /= pv;
        }
        let pivot_a = a[col].clone();
        let pivot_b = b[col].clone();
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for (v, p) in a[r].iter_mut().zip(&pivot_a) {
                *v -= f * p;
            }
            for (v, p) in b[r].iter_mut().zip(&pivot_b) {
                *v -= f * p;
            }
        }
    }
    b
}

/// Flattens an ndarray matrix into the row vectors the naive solver takes.
pub fn to_rows(m: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Rebuilds an ndarray matrix from plain row vectors.
pub fn rows_to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).unwrap()
}

/// Plain-vector identity matrix for the naive solver.
pub fn eye_rows(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| f64::from(i == j)).collect())
        .collect()
}

/// Largest absolute entrywise difference between an ndarray matrix and a
/// plain row-vector matrix.
pub fn max_abs_vs_rows(a: ArrayView2<'_, f64>, b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.nrows(), b.len());
    let mut worst = 0.0f64;
    for (i, row) in b.iter().enumerate() {
        assert_eq!(a.ncols(), row.len());
        for (j, &v) in row.iter().enumerate() {
            worst = worst.max((a[(i, j)] - v).abs());
        }
    }
    worst
}

/// Largest absolute entrywise difference between two ndarray matrices.
pub fn max_abs_diff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Relative Frobenius distance `‖a − b‖_F / ‖b‖_F`.
pub fn rel_frobenius(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        diff += (x - y) * (x - y);
        norm += y * y;
    }
    (diff / norm.max(f64::MIN_POSITIVE)).sqrt()
}

/// Deterministic matrix with entries uniform in [-scale, scale].
pub fn uniform_matrix(rows: usize, cols: usize, seed: u64, scale: f64) -> Array2<f64> {
    let dist = Uniform::new_inclusive(-scale, scale).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
    Array2::from_shape_vec((rows, cols), values).unwrap()
}

/// Deterministic labels cycling through `classes`.
pub fn cycling_labels(n: usize, classes: &[u32]) -> Vec<u32> {
    (0..n).map(|i| classes[i % classes.len()]).collect()
}

/// Loads the bundled handwritten-digits fixture (1797 rows, 64 features,
/// 10 classes).
pub fn load_digits() -> SampleSet {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = root.join("../../data/digits");
    acil::load_sample_set(&dir.join("features.bin"), &dir.join("labels.bin"))
        .expect("digits fixture missing; regenerate with tools/export_digits.py")
}

/// Runs `body`, then prints one `PASS`/`FAIL` line for the named check so a
/// suite run reads as a checklist.
pub fn report<F>(name: &str, body: F)
where
    F: FnOnce(),
{
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)) {
        Ok(()) => println!("acceptance [{name}]: PASS"),
        Err(cause) => {
            println!("acceptance [{name}]: FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}
