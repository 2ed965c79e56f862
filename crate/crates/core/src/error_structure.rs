//! Splitting simulation errors into the part that commutes with `H` and
//! the part that does not, and what each does over many steps.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::channels::second_order_error_commutators;
use crate::error::{Error, Result};
use crate::formulas::uk_coefficient;
use crate::linalg::{evolve_with, hermitian_eigen, HermitianEigen, Matrix, C64};
use crate::pauli::Model;

/// `E = [H, η] + ξ` with `[H, ξ] = 0`.
#[derive(Clone, Debug)]
pub struct ErrorSplit {
    pub xi: Matrix,
    pub eta: Matrix,
    /// Gap below which two eigenvalues count as degenerate.
    pub degeneracy_tolerance: f64,
    /// Pairs with `0 < |E_i − E_j| <= tol` routed to `ξ`.
    pub near_degenerate_pairs: usize,
}

impl ErrorSplit {
    /// `[H, η]`.
    pub fn noncommuting(&self, h: &Matrix) -> Matrix {
        h.commutator(&self.eta)
    }

    /// `[H, η] + ξ`.
    pub fn reconstruct(&self, h: &Matrix) -> Matrix {
        let mut e = self.noncommuting(h);
        e += &self.xi;
        e
    }
}

/// Default degeneracy tolerance `1e-8 · max|E_i|`.
pub fn default_degeneracy_tolerance(eig: &HermitianEigen) -> f64 {
    let max = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-8 * max
}

/// Splits `e` against the Hermitian `h`.
pub fn decompose_commuting(e: &Matrix, h: &Matrix) -> Result<ErrorSplit> {
    let eig = hermitian_eigen(h)?;
    let tol = default_degeneracy_tolerance(&eig);
    decompose_with(e, &eig, tol)
}

/// In the eigenbasis of `H`, entries with `|E_i − E_j| <= tol` go to `ξ`
/// and the rest give `η_ij = e_ij / (E_i − E_j)`; `η` has no in-block part.
pub fn decompose_with(e: &Matrix, eig: &HermitianEigen, tol: f64) -> Result<ErrorSplit> {
    let d = eig.dim();
    e.check_square()?;
    if e.rows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: e.rows(),
        });
    }
    let et = eig.to_eigenbasis(e);
    let mut xi = Matrix::zeros(d, d);
    let mut eta = Matrix::zeros(d, d);
    let mut near = 0usize;
    for i in 0..d {
        for j in 0..d {
            let gap = eig.values[i] - eig.values[j];
            if gap.abs() <= tol {
                if gap != 0.0 && i < j {
                    near += 1;
                }
                xi[(i, j)] = et[(i, j)];
            } else {
                eta[(i, j)] = et[(i, j)] / gap;
            }
        }
    }
    if near > 0 {
        log::info!("{near} near-degenerate eigenvalue pairs treated as degenerate");
    }
    Ok(ErrorSplit {
        xi: eig.from_eigenbasis(&xi),
        eta: eig.from_eigenbasis(&eta),
        degeneracy_tolerance: tol,
        near_degenerate_pairs: near,
    })
}

/// `N ξ + (1/Δt)[e^{−iHt} η e^{iHt} − η]` with `t = N Δt`.
///
/// The two terms are orthogonal in the trace inner product (`ξ` lives in
/// the degenerate blocks of `H`, the bracket outside them), so the norm of
/// this estimate does not depend on the relative phase between them.
pub fn long_time_error_estimate(split: &ErrorSplit, h: &Matrix, n: u64, dt: f64) -> Result<Matrix> {
    let eig = hermitian_eigen(h)?;
    long_time_error_estimate_with(split, &eig, n, dt)
}

pub fn long_time_error_estimate_with(split: &ErrorSplit, eig: &HermitianEigen, n: u64, dt: f64) -> Result<Matrix> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let mut out = split.xi.scale_real(n as f64);
    if split.eta.max_abs() > 0.0 {
        let t = n as f64 * dt;
        let w = evolve_with(eig, t);
        let mut rotated = w.matmul(&split.eta).matmul(&w.adjoint());
        rotated -= &split.eta;
        out.axpy(C64::new(1.0 / dt, 0.0), &rotated);
    }
    Ok(out)
}

/// `√(2/(d(d+1))) · N · L₀ · Δt^q` with `L₀² = d‖ξ_q‖² − |Tr ξ_q† V|²`:
/// the long-time loss predicted by the weighted commuting coefficient.
pub fn long_time_loss_estimate(xi_q: &Matrix, v: &Matrix, n: u64, dt: f64, q: usize) -> f64 {
    let d = v.rows() as f64;
    let l0 = (d * xi_q.frobenius_norm_sqr() - xi_q.inner(v).norm_sqr()).max(0.0).sqrt();
    (2.0 / (d * (d + 1.0))).sqrt() * n as f64 * l0 * dt.powi(q as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RecursionMode {
    /// `(1 − 2u_k) u_k^k t² [H, [H, E_{k−2}(t)]]`.
    DoubleCommutator,
    /// `[e^{iHu_k t}, [e^{iH(1−2u_k)t}, u_k^{k−1} E_{k−2}(t)]]`, using
    /// `E_{k−2}(u_k t) ≈ u_k^{k−1} E_{k−2}(t)`.
    Sandwich,
}

/// Estimate of the order-`k` formula error from the order-`(k−2)` error
/// `e_prev` at the same time `t`.
///
/// Expanding the sandwich form to second order in `t` gives the double
/// commutator with the opposite sign; both are provided as written.
pub fn recursion_estimate(e_prev: &Matrix, h: &Matrix, k: usize, t: f64, mode: RecursionMode) -> Result<Matrix> {
    let u = uk_coefficient(k)?;
    e_prev.check_same_dim(h)?;
    let scale = u.powi(k as i32 - 1);
    match mode {
        RecursionMode::DoubleCommutator => {
            let inner = h.commutator(e_prev);
            Ok(h.commutator(&inner).scale_real((1.0 - 2.0 * u) * scale * u * t * t))
        }
        RecursionMode::Sandwich => {
            let eig = hermitian_eigen(h)?;
            // e^{iHs} = evolve(−s).
            let outer = evolve_with(&eig, -u * t);
            let middle = evolve_with(&eig, -(1.0 - 2.0 * u) * t);
            let inner = middle.commutator(&e_prev.scale_real(scale));
            Ok(outer.commutator(&inner))
        }
    }
}

/// Residuals of the all-to-all commutation identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutationResiduals {
    /// `‖[H, C₁]‖ / (‖H‖ ‖C₁‖ + ε)` with `C₁ = Σ_{μ>ν} [H_μ, H_ν]`.
    pub first_order: f64,
    /// Same for the second-order formula's third-order error
    /// (ordering `H_X, H_Y, H_Z`).
    pub second_order: f64,
}

/// Builds the power-law Heisenberg chain and checks whether the
/// first- and second-order error operators commute with `H`. At `α = 0`
/// both residuals vanish.
pub fn all_to_all_commutation_check(n: usize, alpha: f64) -> Result<CommutationResiduals> {
    if n < 2 {
        return Err(Error::param("n", "need at least two qubits"));
    }
    let spec = Model::PowerlawHeisenberg { n, alpha }.build()?;
    let groups = spec.groups_dense()?;
    let h = spec.dense()?;
    let d = spec.dim();
    let mut c1 = Matrix::zeros(d, d);
    for mu in 0..groups.len() {
        for nu in 0..mu {
            c1 += &groups[mu].commutator(&groups[nu]);
        }
    }
    let rel = |x: &Matrix| h.commutator(x).frobenius_norm() / (h.frobenius_norm() * x.frobenius_norm() + f64::MIN_POSITIVE);
    let order: Vec<usize> = (0..groups.len()).collect();
    let e3 = second_order_error_commutators(&groups, &order)?;
    Ok(CommutationResiduals {
        first_order: rel(&c1),
        second_order: rel(&e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::error_series;
    use crate::formulas::{make_formula, Compiler};
    use crate::linalg::{evolve_unitary, haar_state};
    use crate::pauli::build_model;
    use alloc::collections::BTreeMap;
    use alloc::string::{String, ToString};

    fn random_matrix(d: usize, seed: u64) -> Matrix {
        let cols: Vec<Vec<C64>> = (0..d).map(|j| haar_state(d, seed * 97 + j as u64).unwrap()).collect();
        Matrix::from_fn(d, d, |i, j| cols[j][i])
    }

    #[test]
    fn diagonal_error_is_all_commuting() {
        let h = Matrix::diag_real(&[0.0, 1.0, 3.0, 7.0]);
        let e = Matrix::diag_real(&[0.2, -0.1, 0.4, 1.0]);
        let s = decompose_commuting(&e, &h).unwrap();
        assert!((&s.xi - &e).frobenius_norm() < 1e-14);
        assert!(s.eta.frobenius_norm() < 1e-14);
    }

    #[test]
    fn exact_commutator_is_all_noncommuting() {
        let h = Matrix::diag_real(&[0.0, 1.0, 3.0, 7.0]);
        let mut k = random_matrix(4, 3);
        for i in 0..4 {
            k[(i, i)] = C64::new(0.0, 0.0);
        }
        let e = h.commutator(&k);
        let s = decompose_commuting(&e, &h).unwrap();
        assert!(s.xi.frobenius_norm() < 1e-9);
        assert!((&s.eta - &k).frobenius_norm() < 1e-9);
    }

    #[test]
    fn round_trip_on_xy_chain() {
        let p: BTreeMap<String, f64> = [("n".to_string(), 3.0), ("h".to_string(), 1.0)].into();
        let h = build_model("xy_chain", &p).unwrap().dense().unwrap();
        let e = random_matrix(8, 5);
        let s = decompose_commuting(&e, &h).unwrap();
        assert!((&s.reconstruct(&h) - &e).frobenius_norm() < 1e-10 * e.frobenius_norm());
        let comm = h.commutator(&s.xi).frobenius_norm();
        assert!(comm <= 1e-8 * h.frobenius_norm() * s.xi.frobenius_norm());
    }

    #[test]
    fn degenerate_blocks_stay_in_xi() {
        let h = Matrix::diag_real(&[1.0, 1.0, 2.0]);
        let e = random_matrix(3, 8);
        let s = decompose_commuting(&e, &h).unwrap();
        assert!((s.xi[(0, 1)] - e[(0, 1)]).norm() < 1e-14);
        assert_eq!(s.near_degenerate_pairs, 0);
        let h = Matrix::diag_real(&[1.0, 1.0 + 1e-12, 2.0]);
        let s = decompose_commuting(&e, &h).unwrap();
        assert_eq!(s.near_degenerate_pairs, 1);
    }

    #[test]
    fn long_time_special_cases() {
        let h = Matrix::diag_real(&[0.0, 1.0, 3.0]);
        let e = Matrix::diag_real(&[0.1, 0.2, 0.3]);
        let s = decompose_commuting(&e, &h).unwrap();
        let est = long_time_error_estimate(&s, &h, 7, 0.01).unwrap();
        assert!((&est - &e.scale_real(7.0)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn time_average_recovers_xi() {
        let h = Matrix::diag_real(&[0.0, 1.0, 2.5, 4.2]);
        let e = random_matrix(4, 11);
        let s = decompose_commuting(&e, &h).unwrap();
        let eig = hermitian_eigen(&h).unwrap();
        let big_t = 1e3 / h.frobenius_norm();
        let steps = 20_000;
        let mut avg = Matrix::zeros(4, 4);
        for j in 0..steps {
            // Midpoint rule.
            let t = (j as f64 + 0.5) * big_t / steps as f64;
            let w = evolve_with(&eig, t);
            avg += &w.matmul(&e).matmul(&w.adjoint());
        }
        let avg = avg.scale_real(1.0 / steps as f64);
        assert!((&avg - &s.xi).frobenius_norm() <= 0.05 * s.xi.frobenius_norm());
    }

    #[test]
    fn recursion_kills_commuting_input_and_scales_as_t_squared() {
        let h = Matrix::diag_real(&[0.0, 1.0, 3.0]);
        let e = Matrix::diag_real(&[0.5, 0.1, 0.2]);
        for mode in [RecursionMode::DoubleCommutator, RecursionMode::Sandwich] {
            assert!(recursion_estimate(&e, &h, 4, 0.3, mode).unwrap().frobenius_norm() < 1e-14);
        }
        let e = random_matrix(3, 2);
        let a = recursion_estimate(&e, &h, 6, 0.1, RecursionMode::DoubleCommutator).unwrap();
        let b = recursion_estimate(&e, &h, 6, 0.2, RecursionMode::DoubleCommutator).unwrap();
        assert!((&b - &a.scale_real(4.0)).frobenius_norm() < 1e-14 * b.frobenius_norm().max(1.0));
    }

    #[test]
    fn all_to_all_identity() {
        for n in [3, 4] {
            let r = all_to_all_commutation_check(n, 0.0).unwrap();
            assert!(r.first_order < 1e-10 && r.second_order < 1e-10, "{r:?}");
        }
        let r = all_to_all_commutation_check(4, 1.0).unwrap();
        assert!(r.first_order > 1e-3);
        assert!(all_to_all_commutation_check(1, 0.0).is_err());
    }

    #[test]
    fn long_time_estimate_tracks_direct_product() {
        let p: BTreeMap<String, f64> = [("n".to_string(), 4.0), ("h".to_string(), 1.0)].into();
        let spec = build_model("xy_chain", &p).unwrap();
        let h = spec.dense().unwrap();
        let mut comp = Compiler::new(&spec).unwrap();
        let c = make_formula(1, &[0, 1]).unwrap();
        let (dt, n) = (1e-3, 1000u64);
        let step = comp.compile(&c, dt).unwrap();
        let v = evolve_unitary(&h, dt).unwrap();
        let s = decompose_commuting(&(&v - &step), &h).unwrap();
        let est = long_time_error_estimate(&s, &h, n, dt).unwrap();
        let direct = (&v.pow(n) - &step.pow(n)).frobenius_norm();
        let rel = (est.frobenius_norm() - direct).abs() / direct;
        assert!(rel < 0.1, "{rel}");
    }

    fn cosine(a: &Matrix, b: &Matrix) -> f64 {
        a.inner(b).re / (a.frobenius_norm() * b.frobenius_norm())
    }

    #[test]
    fn recursion_points_along_fourth_order_error() {
        let p: BTreeMap<String, f64> = [("n".to_string(), 3.0), ("h".to_string(), 1.0)].into();
        let spec = build_model("xy_chain", &p).unwrap();
        let h = spec.dense().unwrap();
        // Coefficients of V − U.
        let e3 = error_series(&make_formula(2, &[0, 1]).unwrap(), &spec, 3).unwrap()[3].scale_real(-1.0);
        let e5 = error_series(&make_formula(4, &[0, 1]).unwrap(), &spec, 5).unwrap()[5].scale_real(-1.0);
        let direct = decompose_commuting(&e5, &h).unwrap().noncommuting(&h);
        let t: f64 = 1e-2;
        let predicted = |mode| {
            let e = recursion_estimate(&e3.scale_real(t.powi(3)), &h, 4, t, mode).unwrap();
            decompose_commuting(&e.scale_real(t.powi(-5)), &h).unwrap().noncommuting(&h)
        };
        let sandwich = cosine(&predicted(RecursionMode::Sandwich), &direct);
        assert!(sandwich >= 0.9, "{sandwich}");
        // The double-commutator form carries the opposite sign.
        let double = cosine(&predicted(RecursionMode::DoubleCommutator), &direct);
        assert!(double <= -0.9, "{double}");
    }
}
