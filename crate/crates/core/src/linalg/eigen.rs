//! Hermitian eigendecomposition.
//!
//! Householder reduction to complex tridiagonal form, a diagonal phase
//! rotation that makes the off-diagonal real, then implicit QL with
//! Wilkinson shifts on the real tridiagonal matrix. Eigenvectors are
//! accumulated through every stage, so the result satisfies
//! `A = Q diag(λ) Q†` to working precision.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::matrix::{Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted before symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q f(Λ) Q†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let n = self.dim();
        let q = &self.vectors;
        let fv: Vec<C64> = self.values.iter().map(|&v| f(v)).collect();
        // (Q F) then times Q†
        let mut qf = q.clone();
        for i in 0..n {
            for j in 0..n {
                qf[(i, j)] *= fv[j];
            }
        }
        qf.matmul(&q.adjoint())
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|v| C64::new(v, 0.0))
    }

    /// Expresses `a` in the eigenbasis: `Q† a Q`.
    pub fn to_eigenbasis(&self, a: &Matrix) -> Matrix {
        self.vectors.adjoint_matmul(&a.matmul(&self.vectors))
    }

    /// Inverse of [`to_eigenbasis`](Self::to_eigenbasis).
    pub fn from_eigenbasis(&self, a: &Matrix) -> Matrix {
        self.vectors.matmul(&a.matmul(&self.vectors.adjoint()))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(A + A†)/2` after checking that its
/// anti-Hermitian part is below [`HERMITIAN_TOL`] relative to `‖A‖_F`.
pub fn hermitian_eigen(a: &Matrix) -> Result<HermitianEigen> {
    let n = a.check_square()?;
    let residual = a.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    if !a.is_finite() {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let mut h = a.hermitian_part();
    let mut q = Matrix::identity(n);

    // Householder tridiagonalization; sub[k] holds T[k+1, k].
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (0..m).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            ONE
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Trailing block update: A <- A - 2 (v w† + w v†), w = p - (v†p) v.
        let off = k + 1;
        let mut p = vec![ZERO; m];
        for i in 0..m {
            let mut acc = ZERO;
            for j in 0..m {
                acc += h[(off + i, off + j)] * v[j];
            }
            p[i] = acc;
        }
        let kappa: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kappa * vi).collect();
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                h[(off + i, off + j)] -= upd * 2.0;
            }
        }
        for i in 0..m {
            h[(off + i, k)] = if i == 0 { alpha } else { ZERO };
            h[(k, off + i)] = if i == 0 { alpha.conj() } else { ZERO };
        }
        sub[k] = alpha;
        // Q <- Q H
        for r in 0..n {
            let mut qv = ZERO;
            for j in 0..m {
                qv += q[(r, off + j)] * v[j];
            }
            for j in 0..m {
                let upd = qv * v[j].conj() * 2.0;
                q[(r, off + j)] -= upd;
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = h[(n - 1, n - 2)];
    }

    // Phase rotation to a real tridiagonal matrix.
    let mut phases = vec![ONE; n];
    let mut off_diag = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let s = sub[k];
        let mag = s.norm();
        phases[k + 1] = if mag == 0.0 { phases[k] } else { phases[k] * (s / mag) };
        off_diag[k + 1] = mag;
    }
    let mut diag: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut diag, &mut off_diag, &mut z, n)?;

    // Eigenvectors: Q * Phase * Z, then sort ascending.
    let mut qp = q;
    for r in 0..n {
        for c in 0..n {
            qp[(r, c)] *= phases[c];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap_or(core::cmp::Ordering::Equal));
    let mut vectors = Matrix::zeros(n, n);
    for r in 0..n {
        for (c_new, &c_old) in order.iter().enumerate() {
            let mut acc = ZERO;
            for k in 0..n {
                let zk = z[k * n + c_old];
                if zk != 0.0 {
                    acc += qp[(r, k)] * zk;
                }
            }
            vectors[(r, c_new)] = acc;
        }
    }
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(HermitianEigen { values, vectors })
}

/// Implicit QL on a real symmetric tridiagonal matrix.
///
/// `d` is the diagonal, `e[1..n]` the sub-diagonal (`e[0]` unused). On
/// return `d` holds the eigenvalues and the columns of `z` (row-major,
/// n×n) the eigenvectors, accumulated onto the incoming `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let max_iter = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NoConvergence {
                    routine: "tridiagonal QL",
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * zf;
                    z[k * n + i] = c * z[k * n + i] - s * zf;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// `e^{-i A t}` for Hermitian `A`, via its eigendecomposition.
pub fn evolve_unitary(a: &Matrix, t: f64) -> Result<Matrix> {
    let eig = hermitian_eigen(a)?;
    Ok(evolve_with(&eig, t))
}

/// `e^{-i A t}` from a precomputed decomposition.
pub fn evolve_with(eig: &HermitianEigen, t: f64) -> Matrix {
    if t == 0.0 {
        return Matrix::identity(eig.dim());
    }
    eig.map(|v| {
        let (s, c) = (v * t).sin_cos();
        C64::new(c, -s)
    })
}

/// `e^{-A τ}` (imaginary-time propagator) from a precomputed decomposition.
pub fn imaginary_evolve_with(eig: &HermitianEigen, tau: f64) -> Matrix {
    eig.map(|v| C64::new((-v * tau).exp(), 0.0))
}
