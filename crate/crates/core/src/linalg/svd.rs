//! Truncated singular value decomposition by one-sided Jacobi rotations.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::matrix::{Matrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `A ≈ U diag(s) V†` with singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vh: Matrix,
    /// Sum of squares of the discarded singular values.
    pub discarded_sqr: f64,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, &s) in self.s.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.vh)
    }
}

/// Full SVD followed by truncation.
///
/// Singular values `<= cutoff * s_max` (and exact zeros) are dropped and
/// at most `max_rank` values are kept. `discarded_sqr` records the squared
/// weight that was removed, so `‖A - U S V†‖_F = sqrt(discarded_sqr)`.
pub fn svd_truncate(a: &Matrix, max_rank: usize, cutoff: f64) -> Result<Svd> {
    if max_rank == 0 {
        return Err(Error::param("max_rank", "must be at least 1"));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        // Work on A† so the Jacobi sweep runs over the shorter dimension.
        let t = svd_truncate(&a.adjoint(), max_rank, cutoff)?;
        return Ok(Svd {
            u: t.vh.adjoint(),
            s: t.s,
            vh: t.u.adjoint(),
            discarded_sqr: t.discarded_sqr,
        });
    }
    let (cols, v, sigma) = jacobi_columns(a)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).unwrap_or(core::cmp::Ordering::Equal));
    let smax = sigma[order[0]];
    let mut keep = Vec::new();
    let mut discarded_sqr = 0.0;
    for &j in &order {
        let s = sigma[j];
        if keep.len() < max_rank && s > 0.0 && s > cutoff * smax {
            keep.push(j);
        } else {
            discarded_sqr += s * s;
        }
    }
    let r = keep.len();
    let mut u = Matrix::zeros(m, r);
    let mut vh = Matrix::zeros(r, n);
    let mut s = Vec::with_capacity(r);
    for (k, &j) in keep.iter().enumerate() {
        let sj = sigma[j];
        s.push(sj);
        for i in 0..m {
            u[(i, k)] = cols[j][i] / sj;
        }
        for i in 0..n {
            vh[(k, i)] = v[(i, j)].conj();
        }
    }
    Ok(Svd {
        u,
        s,
        vh,
        discarded_sqr,
    })
}

/// Truncated SVD from the eigendecomposition of the smaller Gram matrix
/// `A A†` or `A† A`.
///
/// Faster than [`svd_truncate`] for repeated mid-size factorizations, but
/// singular values below about `1e-8·s_max` cannot be resolved; those are
/// always dropped (and counted in `discarded_sqr`).
pub fn svd_gram(a: &Matrix, max_rank: usize, cutoff: f64) -> Result<Svd> {
    if max_rank == 0 {
        return Err(Error::param("max_rank", "must be at least 1"));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    if m > n {
        let t = svd_gram(&a.adjoint(), max_rank, cutoff)?;
        return Ok(Svd {
            u: t.vh.adjoint(),
            s: t.s,
            vh: t.u.adjoint(),
            discarded_sqr: t.discarded_sqr,
        });
    }
    let gram = a.matmul(&a.adjoint()).hermitian_part();
    let eig = super::eigen::hermitian_eigen(&gram)?;
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let smax = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let floor = smax * cutoff.max(GRAM_RESOLUTION);
    let mut keep = Vec::new();
    for j in (0..m).rev() {
        let s = eig.values[j].max(0.0).sqrt();
        if keep.len() < max_rank && s > 0.0 && s > floor {
            keep.push((j, s));
        }
    }
    let r = keep.len();
    let mut u = Matrix::zeros(m, r);
    let mut s = Vec::with_capacity(r);
    for (k, &(j, sj)) in keep.iter().enumerate() {
        s.push(sj);
        for i in 0..m {
            u[(i, k)] = eig.vectors[(i, j)];
        }
    }
    let mut vh = u.adjoint_matmul(a);
    for (k, &sk) in s.iter().enumerate() {
        for i in 0..n {
            vh[(k, i)] /= sk;
        }
    }
    let kept: f64 = s.iter().map(|x| x * x).sum();
    Ok(Svd {
        u,
        s,
        vh,
        discarded_sqr: (total - kept).max(0.0),
    })
}

/// Relative singular value below which [`svd_gram`] drops components.
pub const GRAM_RESOLUTION: f64 = 1e-8;

/// Orthogonalizes the columns of `a` (m >= n). Returns the rotated columns,
/// the accumulated right rotation and the column norms.
fn jacobi_columns(a: &Matrix) -> Result<(Vec<Vec<C64>>, Matrix, Vec<f64>)> {
    let n = a.cols();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    // V stored column-wise as well for cache-friendly rotations.
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut c = alloc::vec![ZERO; n];
            c[j] = C64::new(1.0, 0.0);
            c
        })
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| sq(c)).collect();
    let tol = 1e-15;
    let mut converged = false;
    let mut last_off = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        last_off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                let rel = g / (alpha * beta).sqrt();
                if rel > last_off {
                    last_off = rel;
                }
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                rotate(&mut cols, i, j, c, s, pc);
                rotate(&mut vcols, i, j, c, s, pc);
                norms[i] = sq(&cols[i]);
                norms[j] = sq(&cols[j]);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
            residual: last_off,
        });
    }
    let v = Matrix::from_fn(n, n, |r, c| vcols[c][r]);
    let sigma = norms.iter().map(|x| x.sqrt()).collect();
    Ok((cols, v, sigma))
}

#[inline]
fn sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Column pair rotation: with `y = e^{-iφ} a_j`, set
/// `a_i <- c a_i - s y`, `a_j <- s a_i + c y`.
#[inline]
fn rotate(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase_conj: C64) {
    let (lo, hi) = cols.split_at_mut(j);
    let ci = &mut lo[i];
    let cj = &mut hi[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yy = *y * phase_conj;
        let xi = *x;
        *x = xi * c - yy * s;
        *y = xi * s + yy * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen::hermitian_eigen;

    fn pseudo_random(m: usize, n: usize, seed: u64) -> Matrix {
        let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        Matrix::from_fn(m, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn gram_matches_jacobi() {
        let a = Matrix::from_fn(5, 9, |i, j| C64::new((i * 3 + j) as f64 % 7.0 - 3.0, (i as f64 - j as f64) * 0.3));
        let x = svd_truncate(&a, 9, 0.0).unwrap();
        for b in [a.clone(), a.adjoint()] {
            let y = svd_gram(&b, 9, 0.0).unwrap();
            for (p, q) in x.s.iter().zip(&y.s) {
                assert!((p - q).abs() < 1e-10 * x.s[0]);
            }
            assert!((&y.reconstruct() - &b).frobenius_norm() < 1e-9 * b.frobenius_norm());
        }
        let y = svd_gram(&a, 2, 0.0).unwrap();
        let tail: f64 = x.s[2..].iter().map(|v| v * v).sum();
        assert!((y.discarded_sqr - tail).abs() < 1e-9 * a.frobenius_norm_sqr());
    }

    #[test]
    fn diagonal_truncation() {
        let a = Matrix::diag_real(&[3.0, 2.0, 1.0]);
        let svd = svd_truncate(&a, 2, 0.0).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!((svd.s[0] - 3.0).abs() < 1e-14 && (svd.s[1] - 2.0).abs() < 1e-14);
        let res = (&a - &svd.reconstruct()).frobenius_norm();
        assert!((res - 1.0).abs() < 1e-12);
        assert!((svd.discarded_sqr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [C64::new(1.0, 0.5), C64::new(-0.3, 0.2), C64::new(0.0, 1.0)];
        let v = [C64::new(0.7, 0.0), C64::new(0.1, -0.4)];
        let a = Matrix::from_fn(3, 2, |i, j| u[i] * v[j].conj());
        let svd = svd_truncate(&a, 5, 1e-12).unwrap();
        assert_eq!(svd.rank(), 1);
        assert!((&a - &svd.reconstruct()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn singular_values_match_gram_spectrum() {
        for (m, n, seed) in [(4, 6, 1), (6, 4, 2), (7, 7, 3)] {
            let a = pseudo_random(m, n, seed);
            let svd = svd_truncate(&a, 100, 0.0).unwrap();
            let gram = a.adjoint_matmul(&a);
            let mut ev: Vec<f64> = hermitian_eigen(&gram)
                .unwrap()
                .values
                .iter()
                .map(|&x| x.max(0.0).sqrt())
                .collect();
            ev.reverse();
            for (k, s) in svd.s.iter().enumerate() {
                assert!((s - ev[k]).abs() < 1e-8, "{m}x{n}: {s} vs {}", ev[k]);
            }
            assert!((&a - &svd.reconstruct()).frobenius_norm() < 1e-12);
            assert!(svd.u.unitarity_residual() < 1e-12);
            assert!(svd.vh.adjoint().unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn residual_equals_discarded_weight() {
        let a = pseudo_random(8, 5, 7);
        let svd = svd_truncate(&a, 3, 0.0).unwrap();
        let res = (&a - &svd.reconstruct()).frobenius_norm();
        assert!((res - svd.discarded_sqr.sqrt()).abs() <= 1e-8 * res);
    }
}
