//! Haar-random pure states and single-qubit unitaries.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::matrix::{norm_sqr, Matrix, C64};
use crate::error::{Error, Result};
use crate::rng::{rng, Rng};

/// Normalized complex amplitudes.
pub type StateVector = Vec<C64>;

fn gaussian(r: &mut Rng) -> C64 {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random state of dimension `d` drawn from `r`.
pub fn haar_state_from(d: usize, r: &mut Rng) -> Result<StateVector> {
    if d < 1 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    loop {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(r)).collect();
        let n = norm_sqr(&v).sqrt();
        if n > 1e-300 {
            for z in v.iter_mut() {
                *z /= n;
            }
            return Ok(v);
        }
    }
}

/// Haar-random state of dimension `d`, deterministic per seed.
pub fn haar_state(d: usize, seed: u64) -> Result<StateVector> {
    haar_state_from(d, &mut rng(seed))
}

/// Haar-random 2x2 unitary drawn from `r`: Gaussian columns orthonormalized
/// by Gram-Schmidt.
pub fn haar_su2_from(r: &mut Rng) -> Matrix {
    loop {
        let a = [gaussian(r), gaussian(r)];
        let b = [gaussian(r), gaussian(r)];
        let na = norm_sqr(&a).sqrt();
        if na < 1e-12 {
            continue;
        }
        let a = [a[0] / na, a[1] / na];
        let proj = a[0].conj() * b[0] + a[1].conj() * b[1];
        let b = [b[0] - proj * a[0], b[1] - proj * a[1]];
        let nb = norm_sqr(&b).sqrt();
        if nb < 1e-12 {
            continue;
        }
        let b = [b[0] / nb, b[1] / nb];
        return Matrix::from_vec(2, 2, alloc::vec![a[0], b[0], a[1], b[1]]);
    }
}

/// Haar-random 2x2 unitary, deterministic per seed.
pub fn haar_su2(seed: u64) -> Matrix {
    haar_su2_from(&mut rng(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_state_has_unit_modulus() {
        let v = haar_state(1, 9).unwrap();
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
        assert!(haar_state(0, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(haar_state(8, 3).unwrap(), haar_state(8, 3).unwrap());
        assert_ne!(haar_state(8, 3).unwrap(), haar_state(8, 4).unwrap());
        assert_eq!(haar_su2(5), haar_su2(5));
    }

    #[test]
    fn first_moment_is_maximally_mixed() {
        let d = 4;
        let samples = 10_000;
        let mut acc = Matrix::zeros(d, d);
        let mut r = rng(17);
        for _ in 0..samples {
            let v = haar_state_from(d, &mut r).unwrap();
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        let tol = 3.0 / (samples as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 / d as f64 } else { 0.0 };
                let got = acc[(i, j)] / samples as f64;
                assert!((got - expect).norm() < tol, "({i},{j}) {got}");
            }
        }
    }

    #[test]
    fn su2_twirl_of_z_vanishes() {
        let z = Matrix::diag_real(&[1.0, -1.0]);
        let mut acc = Matrix::zeros(2, 2);
        let mut r = rng(23);
        for _ in 0..10_000 {
            let u = haar_su2_from(&mut r);
            assert!(u.unitarity_residual() < 1e-12);
            acc += &u.matmul(&z).matmul(&u.adjoint());
        }
        assert!(acc.scale_real(1e-4).max_abs() < 5e-2);
    }
}
