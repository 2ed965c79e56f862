//! Ground energies of periodic rings by Lanczos on the sparse Pauli form,
//! used as a reference for iTEBD energies.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fit;
use crate::linalg::{hermitian_eigen, Matrix, C64, ZERO};
use crate::pauli::{HamiltonianSpec, Pauli, PauliTerm};
use crate::rng::rng;

/// Largest ring handled by the sparse solver.
pub const ED_QUBIT_CAP: usize = 22;

const LANCZOS_MAX: usize = 400;
const LANCZOS_TOL: f64 = 1e-12;

/// A Pauli string as bit masks: `P|b⟩ = c · i^{ny} (−1)^{|b ∧ z|} |b ⊕ x⟩`.
struct Flip {
    x: usize,
    z: usize,
    coefficient: C64,
}

fn flips(terms: &[&PauliTerm], n: usize) -> Vec<Flip> {
    terms
        .iter()
        .map(|t| {
            let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
            for (site, p) in t.string.letters().iter().enumerate() {
                let bit = 1usize << (n - 1 - site);
                match p {
                    Pauli::I => {}
                    Pauli::X => x |= bit,
                    Pauli::Z => z |= bit,
                    Pauli::Y => {
                        x |= bit;
                        z |= bit;
                        ny += 1;
                    }
                }
            }
            let phase = match ny % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            Flip {
                x,
                z,
                coefficient: phase * t.coefficient,
            }
        })
        .collect()
}

fn apply(ops: &[Flip], v: &[C64], out: &mut [C64]) {
    for o in out.iter_mut() {
        *o = ZERO;
    }
    for f in ops {
        for (b, &amp) in v.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            // Y = i X Z, so Z acts first on |b⟩.
            let sign = if (b & f.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[b ^ f.x] += f.coefficient * amp * sign;
        }
    }
}

/// Lowest eigenvalue of `H` by Lanczos with full reorthogonalization.
pub fn ground_energy(spec: &HamiltonianSpec, seed: u64) -> Result<f64> {
    let n = spec.n();
    if n > ED_QUBIT_CAP {
        return Err(Error::TooManyQubits {
            n,
            cap: ED_QUBIT_CAP,
        });
    }
    let terms: Vec<&PauliTerm> = spec.terms().collect();
    let ops = flips(&terms, n);
    let d = 1usize << n;
    let mut r = rng(seed);
    let mut v: Vec<C64> = (0..d)
        .map(|_| {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; d];
    let mut last = f64::INFINITY;
    for it in 0..LANCZOS_MAX.min(d) {
        apply(&ops, &v, &mut w);
        let a = dot(&v, &w).re;
        alpha.push(a);
        basis.push(v.clone());
        for q in &basis {
            let c = dot(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let b = norm(&w);
        let e = tridiagonal_min(&alpha, &beta)?;
        if (e - last).abs() < LANCZOS_TOL * e.abs().max(1.0) || b < 1e-12 || it + 1 == d {
            return Ok(e);
        }
        last = e;
        beta.push(b);
        v = w.iter().map(|z| z / b).collect();
    }
    Err(Error::NoConvergence {
        routine: "lanczos",
        iterations: LANCZOS_MAX,
        residual: f64::NAN,
    })
}

fn tridiagonal_min(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let m = alpha.len();
    let t = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(alpha[i], 0.0)
        } else if i + 1 == j || j + 1 == i {
            C64::new(beta[i.min(j)], 0.0)
        } else {
            ZERO
        }
    });
    Ok(hermitian_eigen(&t)?.values[0])
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    for z in a.iter_mut() {
        *z /= n;
    }
}

/// Energy per site extrapolated to infinite size from rings of the given
/// sizes, assuming `e(L) = e_∞ + c / L²`.
#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub sizes: Vec<usize>,
    pub energies: Vec<f64>,
    pub limit: f64,
}

pub fn extrapolate_energy_density(
    build: impl Fn(usize) -> Result<HamiltonianSpec>,
    sizes: &[usize],
    seed: u64,
) -> Result<Extrapolation> {
    if sizes.len() < 2 {
        return Err(Error::param("sizes", "need at least two ring sizes"));
    }
    let mut energies = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let spec = build(l)?;
        energies.push(ground_energy(&spec, seed)? / l as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&l| 1.0 / (l * l) as f64).collect();
    let f = fit::linear(&xs, &energies)?;
    Ok(Extrapolation {
        sizes: sizes.to_vec(),
        energies,
        limit: f.intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Model;

    #[test]
    fn lanczos_matches_dense_ground_energy() {
        for model in [
            Model::HeisenbergChain { n: 6 },
            Model::XyChain { n: 5, h: 0.7 },
            Model::ZxzField {
                n: 6,
                grouping: crate::pauli::Grouping::Sublattice,
            },
        ] {
            let spec = model.build().unwrap();
            let dense = hermitian_eigen(&spec.dense().unwrap()).unwrap().values[0];
            let e = ground_energy(&spec, 1).unwrap();
            assert!((e - dense).abs() < 1e-9, "{} {e} {dense}", model.name());
        }
    }

    #[test]
    fn heisenberg_rings_extrapolate_to_bethe_energy() {
        let ex = extrapolate_energy_density(
            |l| Model::HeisenbergChain { n: l }.build(),
            &[10, 12, 14],
            5,
        )
        .unwrap();
        let exact = 1.0 - 4.0 * core::f64::consts::LN_2;
        assert!((ex.limit - exact).abs() < 1e-3, "{} vs {exact}", ex.limit);
    }
}
