//! Small dense helpers shared by the propagator and the metrics.
//!
//! Reductions are sequential so results are bit-identical between runs.

use nalgebra::DMatrix;

use crate::C64;

/// `sum_i conj(a_i) b_i`
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Eigenvalues of a Hermitian matrix, unordered.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let r = (half * half + b.norm_sqr()).sqrt();
            vec![mean + r, mean - r]
        }
        _ => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    }
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Max entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}
