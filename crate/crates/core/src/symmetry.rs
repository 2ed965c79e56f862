//! Ensembles of circuits conjugated by unitaries that commute with `H`.
//!
//! Conjugating a formula `U₁` by a symmetry `C` leaves the exact evolution
//! fixed and rotates the error `E₁ ↦ C†E₁C`; averaging the rotated copies
//! shrinks the error. Elements are dense matrices, so `n` stays small.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::channels::{check_weights, MixedChannel};
use crate::error::{Error, Result};
use crate::error_structure::{decompose_with, default_degeneracy_tolerance};
use crate::fit::{log_log, LinearFit};
use crate::linalg::{evolve_with, haar_su2_from, hermitian_eigen, HermitianEigen, Matrix, C64};
use crate::rng::rng;

/// Largest `‖O‖₂ Δ` accepted for generator powers.
pub const GENERATOR_STEP_CAP: f64 = 0.1;
/// Default `Δ` for generator powers.
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SymmetryKind {
    /// `{I, (R^H)^{⊗n}}` with `R^H` the Hadamard gate.
    HadamardGlobal,
    /// `{I} ∪ {R^{⊗n}}` for Haar-random `R ∈ SU(2)`.
    HaarGlobal,
    /// `{exp(i m O Δ)}` for `m = 0..M−1`.
    GeneratorPowers,
}

impl SymmetryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryKind::HadamardGlobal => "hadamard_global",
            SymmetryKind::HaarGlobal => "haar_global",
            SymmetryKind::GeneratorPowers => "generator_powers",
        }
    }
}

/// Hermitian generator `O` with step `Δ`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub operator: Matrix,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct SymmetrySet {
    kind: SymmetryKind,
    elements: Vec<Matrix>,
    generator: Option<Generator>,
}

impl SymmetrySet {
    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    /// `C_0 = I, C_1, …, C_{M−1}`.
    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Single-qubit Hadamard gate.
pub fn hadamard() -> Matrix {
    let s = 0.5f64.sqrt();
    Matrix::from_real(2, 2, &[s, s, s, -s])
}

/// `R^{⊗n}`.
pub fn global_product(r: &Matrix, n: usize) -> Matrix {
    let mut out = Matrix::identity(1);
    for _ in 0..n {
        out = out.kron(r);
    }
    out
}

/// `Σ_i H_i` with `H_i` the Hadamard matrix on qubit `i`: generates
/// rotations about the `(x + z)/√2` axis.
pub fn hadamard_generator(n: usize) -> Matrix {
    let d = 1usize << n;
    let mut out = Matrix::zeros(d, d);
    let id = Matrix::identity(2);
    let had = hadamard();
    for site in 0..n {
        let mut term = Matrix::identity(1);
        for j in 0..n {
            term = term.kron(if j == site { &had } else { &id });
        }
        out += &term;
    }
    out
}

fn qubits_of(h: &Matrix) -> Result<usize> {
    let d = h.check_square()?;
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::param("H", alloc::format!("dimension {d} is not a power of two")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Builds the set and checks every element against `h`: unitary within
/// `1e-9·√d`, and `‖[C_m, H]‖_F ≤ 1e-8·‖H‖_F`. `delta` is used only by
/// [`SymmetryKind::GeneratorPowers`], whose generator is
/// [`hadamard_generator`].
pub fn make_symmetry_set(kind: SymmetryKind, h: &Matrix, m: usize, seed: u64, delta: f64) -> Result<SymmetrySet> {
    let n = qubits_of(h)?;
    if m < 1 {
        return Err(Error::param("M", "need at least one element"));
    }
    let d = 1usize << n;
    let set = match kind {
        SymmetryKind::HadamardGlobal => {
            if m > 2 {
                return Err(Error::param("M", "hadamard_global has at most two elements"));
            }
            let mut elements = alloc::vec![Matrix::identity(d)];
            if m == 2 {
                elements.push(global_product(&hadamard(), n));
            }
            SymmetrySet {
                kind,
                elements,
                generator: None,
            }
        }
        SymmetryKind::HaarGlobal => {
            let mut r = rng(seed);
            let mut elements = alloc::vec![Matrix::identity(d)];
            for _ in 1..m {
                elements.push(global_product(&haar_su2_from(&mut r), n));
            }
            SymmetrySet {
                kind,
                elements,
                generator: None,
            }
        }
        SymmetryKind::GeneratorPowers => return make_generator_set(hadamard_generator(n), delta, m, h),
    };
    validate(&set, h)?;
    Ok(set)
}

/// `{exp(i m O Δ)}` for `m = 0..M−1` and a caller-supplied Hermitian `O`.
pub fn make_generator_set(o: Matrix, delta: f64, m: usize, h: &Matrix) -> Result<SymmetrySet> {
    if m < 1 {
        return Err(Error::param("M", "need at least one element"));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be positive"));
    }
    o.check_same_dim(h)?;
    let eig = hermitian_eigen(&o)?;
    let norm = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if norm * delta > GENERATOR_STEP_CAP {
        return Err(Error::param(
            "delta",
            alloc::format!("‖O‖Δ = {:.3e} exceeds {GENERATOR_STEP_CAP}", norm * delta),
        ));
    }
    // exp(i m O Δ) = evolve(−mΔ).
    let elements = (0..m).map(|k| evolve_with(&eig, -(k as f64) * delta)).collect();
    let set = SymmetrySet {
        kind: SymmetryKind::GeneratorPowers,
        elements,
        generator: Some(Generator { operator: o, delta }),
    };
    validate(&set, h)?;
    Ok(set)
}

fn validate(set: &SymmetrySet, h: &Matrix) -> Result<()> {
    let d = set.dim();
    h.check_same_dim(&set.elements[0])?;
    let hn = h.frobenius_norm();
    for (index, c) in set.elements.iter().enumerate() {
        let unitarity = c.unitarity_residual();
        if !(unitarity <= 1e-9 * (d as f64).sqrt()) {
            return Err(Error::SymmetryViolated {
                index,
                residual: unitarity,
            });
        }
        let residual = c.commutator(h).frobenius_norm();
        if !(residual <= 1e-8 * hn) {
            return Err(Error::SymmetryViolated { index, residual });
        }
    }
    Ok(())
}

/// `U_m = C_m† U₁ C_m`.
pub fn conjugated_formulas(u1: &Matrix, set: &SymmetrySet) -> Result<Vec<Matrix>> {
    u1.check_same_dim(&set.elements[0])?;
    Ok(set.elements.iter().map(|c| u1.conjugate_by(c)).collect())
}

/// The channel `Σ p_m C_m† U₁ C_m ρ C_m† U₁† C_m`.
pub fn symmetric_channel(u1: &Matrix, set: &SymmetrySet, weights: &[f64]) -> Result<MixedChannel> {
    MixedChannel::new(conjugated_formulas(u1, set)?, weights.to_vec())
}

/// `Σ p_m C_m† E₁ C_m`.
pub fn symmetric_error(e1: &Matrix, set: &SymmetrySet, weights: &[f64]) -> Result<Matrix> {
    if weights.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: weights.len(),
        });
    }
    check_weights(weights)?;
    e1.check_same_dim(&set.elements[0])?;
    let d = set.dim();
    let mut out = Matrix::zeros(d, d);
    for (c, &p) in set.elements.iter().zip(weights) {
        if p != 0.0 {
            out.axpy(C64::new(p, 0.0), &e1.conjugate_by(c));
        }
    }
    Ok(out)
}

/// Residuals of the uniform average over `M` generator powers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuppressionPoint {
    pub m: usize,
    /// `‖[O, η_C]‖_F` of the average.
    pub noncommuting: f64,
    /// `‖ξ_C‖_F` of the average.
    pub commuting: f64,
}

#[derive(Clone, Debug)]
pub struct SuppressionScan {
    pub points: Vec<SuppressionPoint>,
    /// Log-log fit of the non-commuting residual against `M`; `None` when
    /// some residual is below `1e-12·‖E₁‖_F`.
    pub fit: Option<LinearFit>,
}

/// Gaps of `OΔ` that look like `(q/r)·π` with `r ≤ 20` to within `1e-6`
/// are treated as rational.
pub fn looks_rational_multiple_of_pi(x: f64) -> bool {
    let y = x / core::f64::consts::PI;
    (1..=20).any(|r| {
        let q = (y * r as f64).round();
        (y - q / r as f64).abs() <= 1e-6
    })
}

/// Exact `(1/M) Σ_m C_m† E₁ C_m` with `C_m = exp(i m O Δ)` for each `M` in
/// `m_list`, split against `O`.
///
/// Requires at least one nonzero gap of `OΔ` that is not a small-denominator
/// rational multiple of `π` (a soft check).
pub fn suppression_scan(e1: &Matrix, o: &Matrix, delta: f64, m_list: &[usize]) -> Result<SuppressionScan> {
    e1.check_same_dim(o)?;
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be positive"));
    }
    if m_list.contains(&0) {
        return Err(Error::param("M", "need at least one element"));
    }
    let eig = hermitian_eigen(o)?;
    let tol = default_degeneracy_tolerance(&eig).max(1e-12);
    let gaps = distinct_gaps(&eig, tol);
    if gaps.is_empty() {
        return Err(Error::param("O", "generator is proportional to the identity"));
    }
    if gaps.len() + 1 < eig.values.len() {
        log::warn!("degenerate generator: {} distinct gaps for dimension {}", gaps.len(), eig.values.len());
    }
    if gaps.iter().all(|g| looks_rational_multiple_of_pi(g * delta)) {
        return Err(Error::param("delta", "every gap of OΔ is close to a rational multiple of π"));
    }
    let et = eig.to_eigenbasis(e1);
    let d = eig.dim();
    let mut points = Vec::with_capacity(m_list.len());
    for &m in m_list {
        // C_m† E C_m has entries e_ij · exp(−i m Δ (o_i − o_j)).
        let avg = Matrix::from_fn(d, d, |i, j| {
            let w = -delta * (eig.values[i] - eig.values[j]);
            let mut s = C64::new(0.0, 0.0);
            for k in 0..m {
                s += C64::from_polar(1.0, w * k as f64);
            }
            et[(i, j)] * s / m as f64
        });
        let split = decompose_with(&eig.from_eigenbasis(&avg), &eig, tol)?;
        points.push(SuppressionPoint {
            m,
            noncommuting: split.noncommuting(o).frobenius_norm(),
            commuting: split.xi.frobenius_norm(),
        });
    }
    let floor = 1e-12 * e1.frobenius_norm();
    let fit = if points.len() >= 2 && points.iter().all(|p| p.noncommuting > floor) {
        let x: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
        let y: Vec<f64> = points.iter().map(|p| p.noncommuting).collect();
        Some(log_log(&x, &y)?)
    } else {
        None
    };
    Ok(SuppressionScan { points, fit })
}

fn distinct_gaps(eig: &HermitianEigen, tol: f64) -> Vec<f64> {
    let mut gaps: Vec<f64> = Vec::new();
    for (i, a) in eig.values.iter().enumerate() {
        for b in &eig.values[i + 1..] {
            let g = (b - a).abs();
            if g > tol && !gaps.iter().any(|x| (x - g).abs() <= tol) {
                gaps.push(g);
            }
        }
    }
    gaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Model;

    fn heisenberg(n: usize, alpha: f64) -> crate::pauli::HamiltonianSpec {
        Model::PowerlawHeisenberg { n, alpha }.build().unwrap()
    }

    #[test]
    fn hadamard_swaps_x_and_z_groups() {
        let spec = heisenberg(3, 1.0);
        let g = spec.groups_dense().unwrap();
        let set = make_symmetry_set(SymmetryKind::HadamardGlobal, &spec.dense().unwrap(), 2, 0, DEFAULT_DELTA).unwrap();
        let c = &set.elements()[1];
        assert!((&g[0].conjugate_by(c) - &g[2]).frobenius_norm() < 1e-12);
        assert!((&g[2].conjugate_by(c) - &g[0]).frobenius_norm() < 1e-12);
        assert!((&g[1].conjugate_by(c) - &g[1]).frobenius_norm() < 1e-12);
    }

    #[test]
    fn single_element_sets_are_identity() {
        let h = heisenberg(3, 0.5).dense().unwrap();
        for kind in [SymmetryKind::HadamardGlobal, SymmetryKind::HaarGlobal, SymmetryKind::GeneratorPowers] {
            let set = make_symmetry_set(kind, &h, 1, 4, DEFAULT_DELTA).unwrap();
            assert_eq!(set.len(), 1);
            assert!((&set.elements()[0] - &Matrix::identity(8)).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn generator_powers_compose() {
        let h = heisenberg(3, 1.0).dense().unwrap();
        let set = make_symmetry_set(SymmetryKind::GeneratorPowers, &h, 6, 0, DEFAULT_DELTA).unwrap();
        let c1 = &set.elements()[1];
        for (m, cm) in set.elements().iter().enumerate() {
            assert!((&c1.pow(m as u64) - cm).frobenius_norm() < 1e-10);
        }
        assert!(make_symmetry_set(SymmetryKind::GeneratorPowers, &h, 2, 0, 0.05).is_err());
    }

    #[test]
    fn elements_leave_evolution_invariant() {
        let spec = heisenberg(4, 1.0);
        let h = spec.dense().unwrap();
        let v = crate::linalg::evolve_unitary(&h, 0.7).unwrap();
        let set = make_symmetry_set(SymmetryKind::HaarGlobal, &h, 5, 9, DEFAULT_DELTA).unwrap();
        for c in set.elements() {
            assert!((&v.conjugate_by(c) - &v).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_symmetries() {
        let spec = Model::XyChain { n: 3, h: 1.0 }.build().unwrap();
        let err = make_symmetry_set(SymmetryKind::HaarGlobal, &spec.dense().unwrap(), 3, 1, DEFAULT_DELTA).unwrap_err();
        assert!(matches!(err, Error::SymmetryViolated { index: 1, .. }));
    }

    #[test]
    fn symmetric_error_basics() {
        let spec = heisenberg(3, 1.0);
        let h = spec.dense().unwrap();
        let set = make_symmetry_set(SymmetryKind::HaarGlobal, &h, 1, 0, DEFAULT_DELTA).unwrap();
        let e = spec.group_dense(0).unwrap().commutator(&spec.group_dense(1).unwrap());
        assert!((&symmetric_error(&e, &set, &[1.0]).unwrap() - &e).frobenius_norm() < 1e-14);
        let set = make_symmetry_set(SymmetryKind::HaarGlobal, &h, 4, 0, DEFAULT_DELTA).unwrap();
        assert!((&symmetric_error(&h, &set, &[0.25; 4]).unwrap() - &h).frobenius_norm() < 1e-10);
        assert!(matches!(
            symmetric_error(&e, &set, &[0.3; 4]),
            Err(Error::InvalidWeights { .. })
        ));
    }

    #[test]
    fn rational_gap_heuristic() {
        assert!(looks_rational_multiple_of_pi(core::f64::consts::PI / 3.0));
        assert!(looks_rational_multiple_of_pi(0.0));
        assert!(!looks_rational_multiple_of_pi(0.02));
    }

    #[test]
    fn suppression_of_commuting_input_is_zero() {
        let o = hadamard_generator(2);
        let scan = suppression_scan(&o.matmul(&o), &o, 0.01, &[1, 4, 16]).unwrap();
        assert!(scan.points.iter().all(|p| p.noncommuting < 1e-12));
        assert!(scan.fit.is_none());
        let pi = Matrix::diag_real(&[0.0, core::f64::consts::PI]);
        assert!(suppression_scan(&Matrix::identity(2), &pi, 1.0, &[2]).is_err());
    }

    #[test]
    fn suppression_at_one_is_input_split() {
        let o = hadamard_generator(2);
        let e = Model::XyChain { n: 2, h: 1.0 }.build().unwrap().dense().unwrap();
        let scan = suppression_scan(&e, &o, 0.01, &[1]).unwrap();
        let split = crate::error_structure::decompose_commuting(&e, &o).unwrap();
        let expect = split.noncommuting(&o).frobenius_norm();
        assert!((scan.points[0].noncommuting - expect).abs() < 1e-10 * expect);
    }
}
