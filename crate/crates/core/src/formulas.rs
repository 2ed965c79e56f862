//! Suzuki-Trotter product formulas over Hamiltonian groups.
//!
//! A [`Circuit`] is a list of stages `(g, f)` read as the operator product
//! `e^{-i H_{g_0} f_0 t} e^{-i H_{g_1} f_1 t} …`, leftmost factor first.
//! Group indices and orderings are 0-based.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{evolve_with, hermitian_eigen, HermitianEigen, Matrix};
use crate::pauli::HamiltonianSpec;

/// Default cap on `Γ!` for [`all_orderings`].
pub const ORDERING_CAP: usize = 720;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage {
    pub group: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Circuit {
    stages: Vec<Stage>,
    order: usize,
    ordering: Vec<usize>,
}

impl Circuit {
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn num_groups(&self) -> usize {
        self.ordering.len()
    }

    /// Total time fraction spent in each group (1 for a valid formula).
    pub fn fraction_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.ordering.len()];
        for s in &self.stages {
            sums[s.group] += s.fraction;
        }
        sums
    }

    /// Leading error order `q = k + 1`.
    pub fn error_order(&self) -> usize {
        self.order + 1
    }
}

/// One stage per line, `g<idx> * <fraction>`.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stages {
            writeln!(f, "g{} * {}", s.group, s.fraction)?;
        }
        Ok(())
    }
}

/// `u_k = 1 / (4 - 4^{1/(k-1)})` for even `k >= 4`.
pub fn uk_coefficient(k: usize) -> Result<f64> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::UnsupportedOrder(k));
    }
    Ok(1.0 / (4.0 - 4.0.powf(1.0 / (k as f64 - 1.0))))
}

fn check_ordering(ordering: &[usize]) -> Result<()> {
    let mut seen = vec![false; ordering.len()];
    for &g in ordering {
        if g >= ordering.len() || seen[g] {
            return Err(Error::InvalidOrdering(ordering.to_vec()));
        }
        seen[g] = true;
    }
    if ordering.is_empty() {
        return Err(Error::InvalidOrdering(Vec::new()));
    }
    Ok(())
}

/// Product formula of order `k` (1 or even) for the given group ordering.
///
/// Even orders above 2 use the five-fold recursion
/// `S_k(t) = S_{k-2}(u_k t)² S_{k-2}((1-4u_k) t) S_{k-2}(u_k t)²` and merge
/// adjacent stages of the same group.
pub fn make_formula(order: usize, ordering: &[usize]) -> Result<Circuit> {
    check_ordering(ordering)?;
    if order == 0 || (order > 1 && order % 2 == 1) {
        return Err(Error::UnsupportedOrder(order));
    }
    let stages = if order == 1 {
        ordering
            .iter()
            .map(|&group| Stage {
                group,
                fraction: 1.0,
            })
            .collect()
    } else {
        even_stages(order, ordering)
    };
    Ok(Circuit {
        stages,
        order,
        ordering: ordering.to_vec(),
    })
}

fn even_stages(order: usize, ordering: &[usize]) -> Vec<Stage> {
    if order == 2 {
        let mut out = Vec::with_capacity(2 * ordering.len());
        let last = ordering.len() - 1;
        for &g in &ordering[..last] {
            out.push(Stage {
                group: g,
                fraction: 0.5,
            });
        }
        out.push(Stage {
            group: ordering[last],
            fraction: 1.0,
        });
        for &g in ordering[..last].iter().rev() {
            out.push(Stage {
                group: g,
                fraction: 0.5,
            });
        }
        return out;
    }
    let u = uk_coefficient(order).expect("even order >= 4");
    let inner = even_stages(order - 2, ordering);
    let mut out: Vec<Stage> = Vec::with_capacity(5 * inner.len());
    for scale in [u, u, 1.0 - 4.0 * u, u, u] {
        for s in &inner {
            let next = Stage {
                group: s.group,
                fraction: s.fraction * scale,
            };
            match out.last_mut() {
                Some(prev) if prev.group == next.group => prev.fraction += next.fraction,
                _ => out.push(next),
            }
        }
    }
    out
}

/// All permutations of `0..gamma` in lexicographic order.
pub fn all_orderings(gamma: usize) -> Result<Vec<Vec<usize>>> {
    all_orderings_capped(gamma, ORDERING_CAP)
}

pub fn all_orderings_capped(gamma: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    if gamma == 0 {
        return Err(Error::param("gamma", "need at least one group"));
    }
    let mut count: usize = 1;
    for k in 2..=gamma {
        count = count.saturating_mul(k);
        if count > cap {
            return Err(Error::CapExceeded { count, cap });
        }
    }
    let mut perm: Vec<usize> = (0..gamma).collect();
    let mut out = Vec::with_capacity(count);
    loop {
        out.push(perm.clone());
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Compiles circuits for one Hamiltonian, caching group eigendecompositions
/// and stage exponentials keyed by `(group, fraction·t)` rounded to 15
/// significant digits.
///
/// A compiler is meant to be owned by one worker; results do not depend on
/// cache state.
pub struct Compiler<'a> {
    spec: &'a HamiltonianSpec,
    eigs: Vec<HermitianEigen>,
    full: Option<HermitianEigen>,
    cache: BTreeMap<(usize, u64), Matrix>,
}

impl<'a> Compiler<'a> {
    pub fn new(spec: &'a HamiltonianSpec) -> Result<Self> {
        let eigs = spec
            .groups_dense()?
            .iter()
            .map(hermitian_eigen)
            .collect::<Result<Vec<_>>>()?;
        Ok(Compiler {
            spec,
            eigs,
            full: None,
            cache: BTreeMap::new(),
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        self.spec
    }

    /// `e^{-i H_g s}`.
    pub fn group_exponential(&mut self, group: usize, s: f64) -> Matrix {
        let key = (group, round_sig15(s).to_bits());
        if let Some(m) = self.cache.get(&key) {
            return m.clone();
        }
        let m = evolve_with(&self.eigs[group], s);
        self.cache.insert(key, m.clone());
        m
    }

    /// Eigendecomposition of the full Hamiltonian.
    pub fn hamiltonian_eigen(&mut self) -> Result<&HermitianEigen> {
        if self.full.is_none() {
            self.full = Some(hermitian_eigen(&self.spec.dense()?)?);
        }
        Ok(self.full.as_ref().expect("just set"))
    }

    /// Exact evolution `V(t) = e^{-iHt}`.
    pub fn exact(&mut self, t: f64) -> Result<Matrix> {
        Ok(evolve_with(self.hamiltonian_eigen()?, t))
    }

    /// Unitary of one application of `c` over time `t`.
    pub fn compile(&mut self, c: &Circuit, t: f64) -> Result<Matrix> {
        let gamma = self.spec.num_groups();
        if c.num_groups() != gamma {
            return Err(Error::DimensionMismatch {
                expected: gamma,
                found: c.num_groups(),
            });
        }
        let d = self.spec.dim();
        let mut u = Matrix::identity(d);
        for (i, s) in c.stages.iter().enumerate() {
            let e = self.group_exponential(s.group, s.fraction * t);
            u = if i == 0 { e } else { u.matmul(&e) };
        }
        Ok(u)
    }

    /// `U(N, dt) = (S(dt))^N`.
    pub fn compile_steps(&mut self, c: &Circuit, dt: f64, steps: u64) -> Result<Matrix> {
        let step = self.compile(c, dt)?;
        repeat_steps(&step, steps)
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }
}

fn round_sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(14 - e);
    if !scale.is_finite() || scale == 0.0 {
        return x;
    }
    (x * scale).round() / scale
}

/// One-off compilation of `c` for `spec` over time `t`.
pub fn compile_unitary(c: &Circuit, spec: &HamiltonianSpec, t: f64) -> Result<Matrix> {
    Compiler::new(spec)?.compile(c, t)
}

/// `U_step^N` by binary powering.
pub fn repeat_steps(step: &Matrix, n: u64) -> Result<Matrix> {
    if n < 1 {
        return Err(Error::param("N", "need at least one step"));
    }
    step.check_square()?;
    Ok(step.pow(n))
}

/// A circuit repeated `steps` times with step `dt = t / steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteppedCircuit {
    pub base: Circuit,
    pub steps: u64,
    pub dt: f64,
}

impl SteppedCircuit {
    pub fn new(base: Circuit, steps: u64, dt: f64) -> Result<Self> {
        if steps < 1 {
            return Err(Error::param("N", "need at least one step"));
        }
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        Ok(SteppedCircuit { base, steps, dt })
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn compile(&self, compiler: &mut Compiler<'_>) -> Result<Matrix> {
        compiler.compile_steps(&self.base, self.dt, self.steps)
    }
}
