//! Translationally invariant MPS in Vidal form.
//!
//! A cell of `L` sites stores one `Γ[r]` per site and one Schmidt vector
//! `λ[r]` per bond, where `λ[r]` sits on the bond to the right of site `r`
//! (so `λ[L-1]` joins neighbouring cells). Site tensors are flat arrays
//! indexed `(a, s, b)` with physical dimension 2.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{haar_state_from, hermitian_eigen, svd_gram, svd_truncate, Matrix, C64, ZERO};
use crate::rng::rng;

/// Schmidt values `s` with `s² < cutoff · s_max²` are dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-12;
/// Default bond dimension cap `D_p`.
pub const DEFAULT_BOND_DIM: usize = 32;
/// Canonical residual above which a step is followed by re-canonicalization.
pub const CANONICAL_TOL: f64 = 1e-6;
/// A truncation that discards more weight than this is logged.
pub const DISCARD_WARN: f64 = 1e-2;

const INIT_NOISE: f64 = 1e-2;
const FIXED_POINT_TOL: f64 = 1e-13;
const FIXED_POINT_MAX_ITER: usize = 20_000;
const PINV_RELATIVE: f64 = 1e-14;

/// One site tensor `Γ_{a s b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    dl: usize,
    dr: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn new(dl: usize, dr: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dl * 2 * dr {
            return Err(Error::DimensionMismatch {
                expected: dl * 2 * dr,
                found: data.len(),
            });
        }
        Ok(SiteTensor { dl, dr, data })
    }

    pub fn left_dim(&self) -> usize {
        self.dl
    }

    pub fn right_dim(&self) -> usize {
        self.dr
    }

    pub fn get(&self, a: usize, s: usize, b: usize) -> C64 {
        self.data[(a * 2 + s) * self.dr + b]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsUnitCell {
    gammas: Vec<SiteTensor>,
    lambdas: Vec<Vec<f64>>,
}

/// Random translationally invariant product state with a little per-site
/// noise, bond dimension 1.
pub fn init_unit_cell(cell_size: usize, bond_dim: usize, seed: u64) -> Result<MpsUnitCell> {
    if bond_dim < 1 {
        return Err(Error::param("bond_dim", "D_p must be at least 1"));
    }
    if cell_size < 1 {
        return Err(Error::param("cell_size", "need at least one site"));
    }
    let mut r = rng(seed);
    let base = haar_state_from(2, &mut r)?;
    let mut gammas = Vec::with_capacity(cell_size);
    for _ in 0..cell_size {
        let mut v: Vec<C64> = base
            .iter()
            .map(|z| {
                let re: f64 = r.sample(StandardNormal);
                let im: f64 = r.sample(StandardNormal);
                *z + C64::new(re, im) * INIT_NOISE
            })
            .collect();
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        for z in v.iter_mut() {
            *z /= n;
        }
        gammas.push(SiteTensor::new(1, 1, v)?);
    }
    Ok(MpsUnitCell {
        gammas,
        lambdas: vec![vec![1.0]; cell_size],
    })
}

impl MpsUnitCell {
    /// Builds a cell from raw tensors. Bond dimensions must chain up
    /// cyclically and every Schmidt value must be positive.
    pub fn from_parts(gammas: Vec<SiteTensor>, lambdas: Vec<Vec<f64>>) -> Result<Self> {
        let l = gammas.len();
        if l == 0 || lambdas.len() != l {
            return Err(Error::param("lambdas", "need one Schmidt vector per site"));
        }
        for r in 0..l {
            let left = &lambdas[(r + l - 1) % l];
            let g = &gammas[r];
            if g.dl != left.len() || g.dr != lambdas[r].len() {
                return Err(Error::DimensionMismatch {
                    expected: left.len(),
                    found: g.dl,
                });
            }
            if lambdas[r].iter().any(|&x| !(x > 0.0)) {
                return Err(Error::param("lambdas", "Schmidt values must be positive"));
            }
        }
        Ok(MpsUnitCell { gammas, lambdas })
    }

    pub fn cell_size(&self) -> usize {
        self.gammas.len()
    }

    pub fn site(&self, r: usize) -> &SiteTensor {
        &self.gammas[r % self.cell_size()]
    }

    /// Schmidt values on the bond right of site `r`, descending.
    pub fn schmidt(&self, r: usize) -> &[f64] {
        &self.lambdas[r % self.cell_size()]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.lambdas.iter().map(Vec::len).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.lambdas.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn left_of(&self, r: usize) -> &[f64] {
        let l = self.cell_size();
        &self.lambdas[(r + l - 1) % l]
    }

    /// `Γ λ Γ λ ... Γ` over `width` sites from `start`, as a matrix with
    /// rows `(a, s_0, …, s_{w-1})` and columns `b`. With `outer` the Schmidt
    /// vectors on both ends are included.
    pub fn window(&self, start: usize, width: usize, outer: bool) -> Matrix {
        let l = self.cell_size();
        let g0 = self.site(start);
        let mut m = Matrix::from_vec(g0.dl * 2, g0.dr, g0.data.clone());
        if outer {
            let left = self.left_of(start);
            for a in 0..g0.dl {
                for s in 0..2 {
                    for b in 0..g0.dr {
                        m[(a * 2 + s, b)] *= left[a];
                    }
                }
            }
        }
        for k in 0..width {
            let r = (start + k) % l;
            if k > 0 {
                let g = &self.gammas[r];
                let gm = Matrix::from_vec(g.dl, 2 * g.dr, g.data.clone());
                let prod = m.matmul(&gm);
                m = Matrix::from_vec(prod.rows() * 2, g.dr, prod.into_vec());
            }
            if k + 1 < width || outer {
                let lam = &self.lambdas[r];
                for i in 0..m.rows() {
                    for (b, &x) in lam.iter().enumerate() {
                        m[(i, b)] *= x;
                    }
                }
            }
        }
        m
    }

    /// Reduced density matrix of `width` consecutive sites starting at
    /// `start`, normalized to unit trace. Valid for a canonical cell.
    pub fn window_rdm(&self, start: usize, width: usize) -> Matrix {
        let theta = self.window(start, width, true);
        let p = 1usize << width;
        let dl = theta.rows() / p;
        let dr = theta.cols();
        let mut rho = Matrix::zeros(p, p);
        let data = theta.as_slice();
        for a in 0..dl {
            let block = &data[a * p * dr..(a + 1) * p * dr];
            for s in 0..p {
                for t in 0..p {
                    let mut acc = ZERO;
                    for b in 0..dr {
                        acc += block[s * dr + b] * block[t * dr + b].conj();
                    }
                    rho[(s, t)] += acc;
                }
            }
        }
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    /// Applies `gate` (acting on `width` sites from `start`, first site as
    /// the most significant bit) and splits the result back into Vidal form
    /// with at most `bond_dim` Schmidt values per bond.
    ///
    /// Returns the largest discarded weight `Σ_{dropped} s² / Σ s²` over the
    /// `width - 1` splits.
    pub fn apply_gate(
        &mut self,
        start: usize,
        width: usize,
        gate: &Matrix,
        bond_dim: usize,
        cutoff: f64,
    ) -> Result<f64> {
        let p = 1usize << width;
        if width < 2 || width > self.cell_size().max(2) || gate.rows() != p || gate.cols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: gate.rows(),
            });
        }
        let theta = self.window(start, width, true);
        let dl = theta.rows() / p;
        let dr = theta.cols();
        // θ'[a, s', c] = Σ_s G[s', s] θ[a, s, c]
        let mut out = vec![ZERO; theta.as_slice().len()];
        let src = theta.as_slice();
        for a in 0..dl {
            for s2 in 0..p {
                let dst = &mut out[(a * p + s2) * dr..(a * p + s2 + 1) * dr];
                for s in 0..p {
                    let g = gate[(s2, s)];
                    if g == ZERO {
                        continue;
                    }
                    let row = &src[(a * p + s) * dr..(a * p + s + 1) * dr];
                    for (d, x) in dst.iter_mut().zip(row) {
                        *d += g * *x;
                    }
                }
            }
        }
        self.split(start, width, out, bond_dim, cutoff)
    }

    /// Splits `θ` (layout `(a, s_0..s_{w-1}, c)`, outer Schmidt vectors
    /// included) into `width` sites by successive SVDs.
    fn split(
        &mut self,
        start: usize,
        width: usize,
        theta: Vec<C64>,
        bond_dim: usize,
        cutoff: f64,
    ) -> Result<f64> {
        let l = self.cell_size();
        let left: Vec<f64> = self.left_of(start).to_vec();
        let right: Vec<f64> = self.lambdas[(start + width - 1) % l].clone();
        let dr = right.len();
        let norm = theta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical("iTEBD window has zero or non-finite norm".into()));
        }
        let mut rest: Vec<C64> = theta.into_iter().map(|z| z / norm).collect();
        let mut prev = left;
        let mut worst = 0.0f64;
        for k in 0..width - 1 {
            let chi = prev.len();
            let tail = 1usize << (width - k - 1);
            let mat = Matrix::from_vec(chi * 2, tail * dr, rest);
            let svd = svd_gram(&mat, bond_dim, cutoff.sqrt())?;
            let kept: f64 = svd.s.iter().map(|x| x * x).sum();
            let total = kept + svd.discarded_sqr;
            let discarded = svd.discarded_sqr / total;
            if discarded > DISCARD_WARN {
                log::warn!("iTEBD truncation discarded weight {discarded:.3e}");
            }
            worst = worst.max(discarded);
            let scale = kept.sqrt();
            let lam: Vec<f64> = svd.s.iter().map(|x| x / scale).collect();
            let rank = lam.len();
            let mut g = vec![ZERO; chi * 2 * rank];
            for a in 0..chi {
                for s in 0..2 {
                    for j in 0..rank {
                        g[(a * 2 + s) * rank + j] = svd.u[(a * 2 + s, j)] / prev[a];
                    }
                }
            }
            let r = (start + k) % l;
            self.gammas[r] = SiteTensor::new(chi, rank, g)?;
            let mut next = svd.vh.into_vec();
            let cols = tail * dr;
            for (j, &x) in lam.iter().enumerate() {
                for z in &mut next[j * cols..(j + 1) * cols] {
                    *z *= x;
                }
            }
            rest = next;
            self.lambdas[r] = lam.clone();
            prev = lam;
        }
        let chi = prev.len();
        let mut g = rest;
        for a in 0..chi {
            for s in 0..2 {
                for c in 0..dr {
                    g[(a * 2 + s) * dr + c] /= prev[a] * right[c];
                }
            }
        }
        let r = (start + width - 1) % l;
        self.gammas[r] = SiteTensor::new(chi, dr, g)?;
        Ok(worst)
    }

    /// Largest deviation from left and right orthonormality,
    /// `‖Σ_s Γ^s λ² Γ^s† − I‖_F` and `‖Σ_s Γ^s† λ_left² Γ^s − I‖_F`, over all
    /// sites.
    #[allow(clippy::needless_range_loop)] // b and a also index the tensor
    pub fn canonical_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.cell_size() {
            let g = &self.gammas[r];
            let lr = &self.lambdas[r];
            let ll = self.left_of(r);
            let mut right = Matrix::zeros(g.dl, g.dl);
            let mut left = Matrix::zeros(g.dr, g.dr);
            for s in 0..2 {
                for a in 0..g.dl {
                    for a2 in 0..g.dl {
                        let mut acc = ZERO;
                        for b in 0..g.dr {
                            acc += g.get(a, s, b) * g.get(a2, s, b).conj() * (lr[b] * lr[b]);
                        }
                        right[(a, a2)] += acc;
                    }
                }
                for b in 0..g.dr {
                    for b2 in 0..g.dr {
                        let mut acc = ZERO;
                        for a in 0..g.dl {
                            acc += g.get(a, s, b).conj() * g.get(a, s, b2) * (ll[a] * ll[a]);
                        }
                        left[(b, b2)] += acc;
                    }
                }
            }
            for (m, d) in [(right, g.dl), (left, g.dr)] {
                let mut dev = m;
                for i in 0..d {
                    dev[(i, i)] -= C64::new(1.0, 0.0);
                }
                worst = worst.max(dev.frobenius_norm());
            }
        }
        worst
    }

    /// Brings the cell to canonical form (Orús–Vidal): the left and right
    /// fixed points of the cell transfer matrix are factorized, absorbed
    /// into the inter-cell bond, and the cell is re-split site by site.
    pub fn canonicalize(&mut self, bond_dim: usize, cutoff: f64) -> Result<()> {
        let l = self.cell_size();
        let p = 1usize << l;
        let lam = self.lambdas[l - 1].clone();
        let chi = lam.len();
        let cell = self.window(0, l, false);
        // A^s = Γ^s λ on the inter-cell bond.
        let a: Vec<Matrix> = (0..p)
            .map(|s| {
                Matrix::from_fn(chi, chi, |i, j| cell[(i * p + s, j)] * lam[j])
            })
            .collect();
        let right = dominant_eigenvector(&a, &a, Side::Right)?.hermitian_part();
        // Left fixed point of N^s = λ Γ^s is λ^{-1}-conjugate of A's; solve
        // directly with N.
        let n: Vec<Matrix> = (0..p)
            .map(|s| {
                Matrix::from_fn(chi, chi, |i, j| cell[(i * p + s, j)] * lam[i])
            })
            .collect();
        let left = dominant_eigenvector(&n, &n, Side::Left)?.hermitian_part();

        let (x, x_pinv) = psd_factor(&right, false)?;
        let (y, y_pinv) = psd_factor(&left, true)?;
        // C = Y λ X
        let mut ylam = y.clone();
        for i in 0..ylam.rows() {
            for j in 0..chi {
                ylam[(i, j)] *= lam[j];
            }
        }
        let c = ylam.matmul(&x);
        let svd = svd_truncate(&c, bond_dim, cutoff.sqrt())?;
        let k = svd.s.len();
        let norm = svd.s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let new_lam: Vec<f64> = svd.s.iter().map(|v| v / norm).collect();
        let left_map = svd.vh.matmul(&x_pinv); // W† X⁺  (k × χ)
        let right_map = y_pinv.matmul(&svd.u); // Y⁺ U  (χ × k)
        let mut gs: Vec<Matrix> = (0..p)
            .map(|s| {
                let gamma = Matrix::from_fn(chi, chi, |i, j| cell[(i * p + s, j)]);
                left_map.matmul(&gamma.matmul(&right_map))
            })
            .collect();
        // Fix the overall scale so the transfer matrix has unit spectral radius.
        let mut t = Matrix::zeros(k, k);
        for g in &gs {
            let mut gl = g.clone();
            for i in 0..k {
                for j in 0..k {
                    gl[(i, j)] *= new_lam[j];
                }
            }
            t = {
                let mut acc = t;
                acc.axpy(C64::new(1.0, 0.0), &gl.matmul(&gl.adjoint()));
                acc
            };
        }
        let eta = t.trace().re / k as f64;
        let sc = 1.0 / eta.sqrt();
        for g in gs.iter_mut() {
            *g = g.scale_real(sc);
        }
        // θ = λ Γ λ with layout (a, s, b).
        let mut theta = vec![ZERO; k * p * k];
        for aa in 0..k {
            for s in 0..p {
                for b in 0..k {
                    theta[(aa * p + s) * k + b] = gs[s][(aa, b)] * (new_lam[aa] * new_lam[b]);
                }
            }
        }
        self.lambdas[l - 1] = new_lam;
        self.split(0, l, theta, bond_dim, cutoff)?;
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// `X ↦ Σ_s A^s X B^s†`
    Right,
    /// `X ↦ Σ_s A^s† X B^s`
    Left,
}

pub(crate) fn apply_transfer(a: &[Matrix], b: &[Matrix], x: &Matrix, side: Side) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for (am, bm) in a.iter().zip(b) {
        let term = match side {
            Side::Right => am.matmul(&x.matmul(&bm.adjoint())),
            Side::Left => am.adjoint_matmul(&x.matmul(bm)),
        };
        out.axpy(C64::new(1.0, 0.0), &term);
    }
    out
}

/// Dominant eigenpair of a (mixed) transfer map by power iteration, started
/// from the identity. Returns the eigenvector (unit Frobenius norm) and the
/// eigenvalue.
pub(crate) fn fixed_point(a: &[Matrix], b: &[Matrix], side: Side) -> Result<(Matrix, C64)> {
    let fp = fixed_point_capped(a, b, side, FIXED_POINT_MAX_ITER, FIXED_POINT_TOL);
    if !fp.converged {
        return Err(Error::NoConvergence {
            routine: "transfer fixed point",
            iterations: FIXED_POINT_MAX_ITER,
            residual: fp.residual,
        });
    }
    Ok((fp.vector, fp.value))
}

pub(crate) struct FixedPoint {
    pub vector: Matrix,
    pub value: C64,
    pub residual: f64,
    pub converged: bool,
}

/// Power iteration started from a (rectangular) identity. A mixed map may
/// not converge to a single eigenvector; `value` is then the last Rayleigh
/// quotient, which still tracks the spectral radius.
pub(crate) fn fixed_point_capped(
    a: &[Matrix],
    b: &[Matrix],
    side: Side,
    max_iter: usize,
    tol: f64,
) -> FixedPoint {
    let (rows, cols) = match side {
        Side::Right => (a[0].rows(), b[0].rows()),
        Side::Left => (a[0].cols(), b[0].cols()),
    };
    let k = rows.min(cols) as f64;
    let mut x = Matrix::from_fn(rows, cols, |i, j| {
        if i == j {
            C64::new(1.0 / k.sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let mut residual = f64::INFINITY;
    let mut value = ZERO;
    for _ in 0..max_iter {
        let y = apply_transfer(a, b, &x, side);
        value = x.inner(&y);
        let n = y.frobenius_norm();
        if !(n > 0.0) {
            return FixedPoint {
                vector: x,
                value: ZERO,
                residual: 0.0,
                converged: true,
            };
        }
        // Align the phase with the previous iterate before comparing.
        let phase = if value.norm() > 0.0 { value / value.norm() } else { C64::new(1.0, 0.0) };
        let next = y.scale(phase.conj() / n);
        let mut diff = next.clone();
        diff.axpy(C64::new(-1.0, 0.0), &x);
        residual = diff.frobenius_norm();
        x = next;
        if residual < tol {
            let y = apply_transfer(a, b, &x, side);
            value = x.inner(&y);
            return FixedPoint {
                vector: x,
                value,
                residual,
                converged: true,
            };
        }
    }
    FixedPoint {
        vector: x,
        value,
        residual,
        converged: false,
    }
}

const KRYLOV_DIM: usize = 24;
const KRYLOV_RESTARTS: usize = 400;
const HESSENBERG_SQUARINGS: usize = 12;

/// Dominant eigenvector of a transfer map by explicitly restarted Arnoldi.
/// The Ritz pair of the small Hessenberg matrix is found by power iteration,
/// which is cheap at this size. Falls back to plain power iteration if the
/// restarts stall.
pub(crate) fn dominant_eigenvector(a: &[Matrix], b: &[Matrix], side: Side) -> Result<Matrix> {
    let (rows, cols) = match side {
        Side::Right => (a[0].rows(), b[0].rows()),
        Side::Left => (a[0].cols(), b[0].cols()),
    };
    let dim = rows * cols;
    let m = KRYLOV_DIM.min(dim);
    let mut x = Matrix::from_fn(rows, cols, |i, j| if i == j { C64::new(1.0, 0.0) } else { ZERO });
    x = x.scale_real(1.0 / x.frobenius_norm());
    for _ in 0..KRYLOV_RESTARTS {
        let mut basis: Vec<Matrix> = Vec::with_capacity(m + 1);
        let mut h = vec![vec![ZERO; m]; m + 1];
        basis.push(x.clone());
        let mut size = m;
        for j in 0..m {
            let mut w = apply_transfer(a, b, &basis[j], side);
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = v.inner(&w);
                    h[i][j] += c;
                    w.axpy(-c, v);
                }
            }
            let beta = w.frobenius_norm();
            h[j + 1][j] = C64::new(beta, 0.0);
            if beta < 1e-14 {
                size = j + 1;
                break;
            }
            basis.push(w.scale_real(1.0 / beta));
        }
        let y = hessenberg_dominant(&h, size);
        let mut next = Matrix::zeros(rows, cols);
        for (yi, v) in y.iter().zip(&basis) {
            next.axpy(*yi, v);
        }
        let ynorm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let theta: C64 = {
            let mut num = ZERO;
            for i in 0..size {
                let mut row = ZERO;
                for k in 0..size {
                    row += h[i][k] * y[k];
                }
                num += y[i].conj() * row;
            }
            num / (ynorm * ynorm)
        };
        let residual = h[size][size - 1].norm() * y[size - 1].norm() / ynorm;
        x = next.scale_real(1.0 / next.frobenius_norm());
        if size < m || residual < FIXED_POINT_TOL * theta.norm().max(1e-300) {
            return Ok(x);
        }
    }
    Ok(fixed_point(a, b, side)?.0)
}

/// Dominant eigenvector of the leading `size × size` block of a Hessenberg
/// matrix: repeated squaring isolates the dominant direction, a few power
/// steps polish it.
fn hessenberg_dominant(h: &[Vec<C64>], size: usize) -> Vec<C64> {
    let hm = Matrix::from_fn(size, size, |i, k| h[i][k]);
    let mut p = hm.clone();
    for _ in 0..HESSENBERG_SQUARINGS {
        p = p.matmul(&p);
        let scale = p.max_abs();
        if !(scale > 0.0) || !scale.is_finite() {
            break;
        }
        p = p.scale_real(1.0 / scale);
    }
    let best = (0..size)
        .max_by(|&i, &j| {
            let ni: f64 = (0..size).map(|r| p[(r, i)].norm_sqr()).sum();
            let nj: f64 = (0..size).map(|r| p[(r, j)].norm_sqr()).sum();
            ni.partial_cmp(&nj).unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut y = p.column(best);
    for _ in 0..4 {
        let z = hm.apply(&y);
        let n = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) {
            break;
        }
        y = z.into_iter().map(|v| v / n).collect();
    }
    y
}

/// Factorizes a positive semidefinite `M` as `X X†` (or `Y† Y` when
/// `adjoint_side`), returning the factor and its pseudo-inverse.
fn psd_factor(m: &Matrix, adjoint_side: bool) -> Result<(Matrix, Matrix)> {
    let eig = hermitian_eigen(m)?;
    // The fixed point is defined up to sign; make it positive.
    let sign = if eig.values.iter().copied().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let vals: Vec<f64> = eig.values.iter().map(|v| v * sign).collect();
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > PINV_RELATIVE * vmax).collect();
    let n = m.rows();
    let r = keep.len();
    let mut x = Matrix::zeros(n, r);
    let mut xp = Matrix::zeros(r, n);
    for (k, &i) in keep.iter().enumerate() {
        let sq = vals[i].sqrt();
        for row in 0..n {
            let v = eig.vectors[(row, i)];
            x[(row, k)] = v * sq;
            xp[(k, row)] = v.conj() / sq;
        }
    }
    if adjoint_side {
        // Y = sqrt(D) V†, Y⁺ = V sqrt(D)^{-1}
        Ok((x.adjoint(), xp.adjoint()))
    } else {
        Ok((x, xp))
    }
}
