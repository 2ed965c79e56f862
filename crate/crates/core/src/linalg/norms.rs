use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::eigen::hermitian_eigen;
use super::matrix::{norm_sqr, Matrix, C64};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormKind {
    Frobenius,
    Spectral,
}

/// Frobenius norm is the usual `sqrt(Σ|a_ij|²)`; quadratic formulas use
/// [`Matrix::frobenius_norm_sqr`] directly.
pub fn norm(a: &Matrix, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Frobenius => Ok(a.frobenius_norm()),
        NormKind::Spectral => spectral_norm(a),
    }
}

const POWER_TOL: f64 = 1e-8;
const POWER_CAP: usize = 10_000;

/// Largest singular value by power iteration on `A†A`, falling back to a
/// full eigendecomposition of `A†A` when the iteration stagnates.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return Ok(0.0);
    }
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return Ok(0.0);
    }
    // Deterministic, generic start vector.
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let x = i as f64 + 1.0;
            C64::new(1.0 + 0.1 * (x * 0.7548776662).sin(), 0.3 * (x * 0.5698402910).cos())
        })
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..POWER_CAP {
        let av = a.apply(&v);
        let mut w = a.adjoint().apply(&av);
        let next = norm_sqr(&av);
        let wn = norm_sqr(&w).sqrt();
        if wn == 0.0 {
            break;
        }
        for z in w.iter_mut() {
            *z /= wn;
        }
        v = w;
        if (next - lambda).abs() <= POWER_TOL * next {
            // Rayleigh quotients approach from below; one refinement step.
            let av = a.apply(&v);
            return Ok(norm_sqr(&av).max(next).sqrt());
        }
        lambda = next;
    }
    log::debug!("spectral norm power iteration stagnated; using A†A eigendecomposition");
    let gram = a.adjoint_matmul(a);
    let eig = hermitian_eigen(&gram.hermitian_part())?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

fn normalize(v: &mut [C64]) {
    let n = norm_sqr(v).sqrt();
    for z in v.iter_mut() {
        *z /= n;
    }
}
