//! Imaginary-time iTEBD with averaged product formulas.
//!
//! Each iteration applies one Trotter step `e^{-dτ H}` (built from the same
//! formulas as the real-time code) to a translationally invariant MPS. The
//! averaged modes evolve two trajectories with reversed group orderings and
//! combine them with equal weights.
//!
//! Convergence is measured on the reduced density matrix of one unit cell:
//! the distance between iterations is `‖ρ_cell(n) − ρ_cell(n−1)‖_F`, with
//! `ρ_cell = Σ_m p_m ρ_cell^{(m)}` for the averaged modes. The cell density
//! matrix is gauge invariant, so no alignment of the tensors is needed.

mod cell;
pub mod ed;
mod local;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub use cell::{
    init_unit_cell, MpsUnitCell, SiteTensor, CANONICAL_TOL, DEFAULT_BOND_DIM, DEFAULT_CUTOFF,
    DISCARD_WARN,
};
pub use local::{local_hamiltonian, LocalBlock, LocalHamiltonian};

use cell::{fixed_point_capped, Side};

use crate::error::{Error, Result};
use crate::formulas::make_formula;
use crate::linalg::{hermitian_eigen, imaginary_evolve_with, Matrix, C64, ZERO};
use crate::pauli::HamiltonianSpec;

/// Mixed transfer maps with spectral radius below `1 − MIXED_TOL` are
/// treated as giving zero overlap between infinite chains.
pub const MIXED_TOL: f64 = 1e-8;

const MIXED_MAX_ITER: usize = 5_000;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceSchedule {
    dtau_list: Vec<f64>,
    threshold: f64,
    max_iterations: usize,
}

impl Default for ConvergenceSchedule {
    fn default() -> Self {
        ConvergenceSchedule {
            dtau_list: vec![0.1, 0.01, 0.001],
            threshold: 1e-10,
            max_iterations: 100_000,
        }
    }
}

impl ConvergenceSchedule {
    pub fn new(dtau_list: Vec<f64>, threshold: f64, max_iterations: usize) -> Result<Self> {
        if dtau_list.is_empty() {
            return Err(Error::param("dtau_list", "must not be empty"));
        }
        if dtau_list.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::param("dtau_list", "entries must be positive"));
        }
        if dtau_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("dtau_list", "must be strictly descending"));
        }
        if !(threshold > 0.0) {
            return Err(Error::param("threshold", "must be positive"));
        }
        if max_iterations < 1 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        Ok(ConvergenceSchedule {
            dtau_list,
            threshold,
            max_iterations,
        })
    }

    pub fn dtau_list(&self) -> &[f64] {
        &self.dtau_list
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FormulaMode {
    K1,
    K2,
    K4,
    AveragedK1,
    AveragedK2,
}

impl FormulaMode {
    pub fn order(self) -> usize {
        match self {
            FormulaMode::K1 | FormulaMode::AveragedK1 => 1,
            FormulaMode::K2 | FormulaMode::AveragedK2 => 2,
            FormulaMode::K4 => 4,
        }
    }

    pub fn averaged(self) -> bool {
        matches!(self, FormulaMode::AveragedK1 | FormulaMode::AveragedK2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaMode::K1 => "k1",
            FormulaMode::K2 => "k2",
            FormulaMode::K4 => "k4",
            FormulaMode::AveragedK1 => "averaged_k1",
            FormulaMode::AveragedK2 => "averaged_k2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Combine {
    /// Average observables over trajectories.
    Trajectories,
    /// Rayleigh quotient of `Σ_m p_m |ψ_m⟩`.
    Lcu,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ItebdOptions {
    pub bond_dim: usize,
    pub cutoff: f64,
}

impl Default for ItebdOptions {
    fn default() -> Self {
        ItebdOptions {
            bond_dim: DEFAULT_BOND_DIM,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

/// One row of the convergence log.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub dtau: f64,
    /// Counted over the whole schedule, starting at 1.
    pub iteration: usize,
    pub distance: f64,
    pub energy: f64,
    pub bond_dim: usize,
    pub discarded_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageReport {
    pub dtau: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_distance: f64,
}

#[derive(Clone, Debug)]
pub struct ItebdRun {
    pub mode: FormulaMode,
    pub combine: Combine,
    pub states: Vec<MpsUnitCell>,
    pub weights: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stages: Vec<StageReport>,
    pub log: Vec<LogEntry>,
    /// `|η|` of the mixed transfer map for each pair of trajectories (LCU
    /// combine only).
    pub mixed_radii: Vec<f64>,
}

/// Applies `gate` to the `log2(dim)` sites starting at `start`.
pub fn imaginary_step(
    state: &mut MpsUnitCell,
    gate: &Matrix,
    start: usize,
    bond_dim: usize,
    cutoff: f64,
) -> Result<f64> {
    let p = gate.rows();
    if !p.is_power_of_two() || p < 4 {
        return Err(Error::param("gate", "must act on two or more qubits"));
    }
    state.apply_gate(start, p.trailing_zeros() as usize, gate, bond_dim, cutoff)
}

/// Energy per site `Σ_g ⟨h_g⟩ / L`. A cell that is not canonical is
/// canonicalized (on a copy) first.
pub fn energy_density(state: &MpsUnitCell, local: &LocalHamiltonian) -> Result<f64> {
    check_cell(state, local)?;
    if state.canonical_residual() > CANONICAL_TOL {
        let mut c = state.clone();
        c.canonicalize(c.max_bond_dim().max(1), DEFAULT_CUTOFF)?;
        return Ok(energy_canonical(&c, local));
    }
    Ok(energy_canonical(state, local))
}

fn energy_canonical(state: &MpsUnitCell, local: &LocalHamiltonian) -> f64 {
    let mut e = 0.0;
    for b in &local.blocks {
        let rho = state.window_rdm(b.offset, local.width);
        e += rho.inner(&b.matrix).re;
    }
    e / local.cell_size as f64
}

fn check_cell(state: &MpsUnitCell, local: &LocalHamiltonian) -> Result<()> {
    if state.cell_size() != local.cell_size {
        return Err(Error::DimensionMismatch {
            expected: local.cell_size,
            found: state.cell_size(),
        });
    }
    Ok(())
}

/// `A^s = Γ_cell^s λ_{L-1}` for every cell configuration `s`.
fn cell_matrices(state: &MpsUnitCell) -> Vec<Matrix> {
    let l = state.cell_size();
    let p = 1usize << l;
    let cell = state.window(0, l, false);
    let lam = state.schmidt(l - 1);
    let (dl, dr) = (cell.rows() / p, cell.cols());
    (0..p)
        .map(|s| Matrix::from_fn(dl, dr, |i, j| cell[(i * p + s, j)] * lam[j]))
        .collect()
}

/// Spectral radius of the mixed transfer map `X ↦ Σ_s A^s X B^s†`.
pub fn mixed_transfer_radius(a: &MpsUnitCell, b: &MpsUnitCell) -> f64 {
    let am = cell_matrices(a);
    let bm = cell_matrices(b);
    fixed_point_capped(&am, &bm, Side::Right, MIXED_MAX_ITER, 1e-12).value.norm()
}

/// `⟨ψ_b| h |ψ_a⟩ / ⟨ψ_b|ψ_a⟩` per site from the dominant left and right
/// eigenvectors of the mixed transfer map. Works for non-canonical cells.
pub fn mixed_energy_density(
    a: &MpsUnitCell,
    b: &MpsUnitCell,
    local: &LocalHamiltonian,
) -> Result<f64> {
    check_cell(a, local)?;
    check_cell(b, local)?;
    let l = local.cell_size;
    let p = 1usize << l;
    let am = cell_matrices(a);
    let bm = cell_matrices(b);
    let right = fixed_point_capped(&am, &bm, Side::Right, MIXED_MAX_ITER, 1e-13);
    let left = fixed_point_capped(&bm, &am, Side::Left, MIXED_MAX_ITER, 1e-13);
    if !right.converged || !left.converged {
        return Err(Error::NoConvergence {
            routine: "mixed transfer fixed point",
            iterations: MIXED_MAX_ITER,
            residual: right.residual.max(left.residual),
        });
    }
    let eta = right.value;
    let (lm, rm) = (left.vector, right.vector);
    // Two-cell products; the local blocks fit in 2L sites.
    let pp = p * p;
    let mut xs = Vec::with_capacity(pp); // L A2^S
    let mut ys = Vec::with_capacity(pp); // R B2^S†
    for s in 0..pp {
        let (s1, s2) = (s / p, s % p);
        let a2 = am[s1].matmul(&am[s2]);
        let b2 = bm[s1].matmul(&bm[s2]);
        xs.push(lm.matmul(&a2));
        ys.push(rm.matmul(&b2.adjoint()));
    }
    let norm = lm.matmul(&rm).trace() * eta * eta;
    let mut total = ZERO;
    for blk in &local.blocks {
        let op = embed_block(&blk.matrix, local.width, blk.offset, 2 * l);
        for s in 0..pp {
            for t in 0..pp {
                let o = op[(t, s)];
                if o == ZERO {
                    continue;
                }
                total += o * trace_product(&xs[s], &ys[t]);
            }
        }
    }
    Ok((total / norm).re / l as f64)
}

fn trace_product(x: &Matrix, y: &Matrix) -> C64 {
    let mut acc = ZERO;
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// `I ⊗ h ⊗ I` on `n` sites with `h` on `offset..offset+w`.
fn embed_block(h: &Matrix, w: usize, offset: usize, n: usize) -> Matrix {
    let left = Matrix::identity(1 << offset);
    let right = Matrix::identity(1 << (n - offset - w));
    left.kron(h).kron(&right)
}

/// Energy per site of `Σ_m p_m |ψ_m⟩`.
///
/// The overlap of two distinct infinite MPS vanishes, so only pairs whose
/// mixed transfer map has unit spectral radius contribute cross terms; those
/// are evaluated with [`mixed_energy_density`]. Returns the energy and the
/// radius for each unordered pair.
pub fn lcu_energy_density(
    states: &[MpsUnitCell],
    weights: &[f64],
    local: &LocalHamiltonian,
) -> Result<(f64, Vec<f64>)> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut radii = Vec::new();
    for (m, a) in states.iter().enumerate() {
        num += weights[m] * weights[m] * energy_density(a, local)?;
        den += weights[m] * weights[m];
        for (n, b) in states.iter().enumerate().skip(m + 1) {
            let r = mixed_transfer_radius(a, b);
            radii.push(r);
            if r > 1.0 - MIXED_TOL {
                let w = 2.0 * weights[m] * weights[n];
                num += w * mixed_energy_density(a, b, local)?;
                den += w;
            }
        }
    }
    Ok((num / den, radii))
}

/// Runs the imaginary-time schedule from `initial`.
pub fn run_schedule(
    initial: &MpsUnitCell,
    spec: &HamiltonianSpec,
    schedule: &ConvergenceSchedule,
    mode: FormulaMode,
    combine: Combine,
    options: &ItebdOptions,
) -> Result<ItebdRun> {
    let model = spec
        .model()
        .ok_or_else(|| Error::param("model", "iTEBD needs a named chain model"))?;
    let local = local_hamiltonian(model)?;
    check_cell(initial, &local)?;
    if options.bond_dim < 1 {
        return Err(Error::param("bond_dim", "D_p must be at least 1"));
    }
    let groups = local.num_groups();
    let natural: Vec<usize> = (0..groups).collect();
    let mut orderings = vec![natural.clone()];
    if mode.averaged() {
        orderings.push(natural.iter().rev().copied().collect());
    }
    let circuits = orderings
        .iter()
        .map(|o| make_formula(mode.order(), o))
        .collect::<Result<Vec<_>>>()?;
    let m = circuits.len();
    let weights = vec![1.0 / m as f64; m];
    let eigs = local
        .blocks
        .iter()
        .map(|b| hermitian_eigen(&b.matrix))
        .collect::<Result<Vec<_>>>()?;

    let (bond_dim, cutoff) = (options.bond_dim, options.cutoff);
    let mut states = vec![initial.clone(); m];
    for s in states.iter_mut() {
        s.canonicalize(bond_dim, cutoff)?;
    }
    let cell_rdm = |states: &[MpsUnitCell]| -> Matrix {
        let mut rho = Matrix::zeros(1 << local.cell_size, 1 << local.cell_size);
        for (s, w) in states.iter().zip(&weights) {
            rho.axpy(C64::new(*w, 0.0), &s.window_rdm(0, local.cell_size));
        }
        rho
    };
    let mut rho_prev = cell_rdm(&states);
    let mut log = Vec::new();
    let mut stages = Vec::new();
    let mut total = 0usize;
    let mut all_converged = true;

    for &dtau in schedule.dtau_list() {
        // Stages are stored in operator-product order; the rightmost acts first.
        let steps: Vec<Vec<(usize, Matrix)>> = circuits
            .iter()
            .map(|c| {
                c.stages()
                    .iter()
                    .rev()
                    .map(|st| {
                        let blk = &local.blocks[st.group];
                        (blk.offset, imaginary_evolve_with(&eigs[st.group], st.fraction * dtau))
                    })
                    .collect()
            })
            .collect();
        let mut converged = false;
        let mut distance = f64::INFINITY;
        let mut iterations = 0usize;
        while iterations < schedule.max_iterations() {
            let mut discarded = 0.0f64;
            for (state, step) in states.iter_mut().zip(&steps) {
                for (offset, gate) in step {
                    let d = state.apply_gate(*offset, local.width, gate, bond_dim, cutoff)?;
                    discarded = discarded.max(d);
                }
                if state.canonical_residual() > CANONICAL_TOL {
                    state.canonicalize(bond_dim, cutoff)?;
                }
            }
            iterations += 1;
            total += 1;
            let rho = cell_rdm(&states);
            let mut diff = rho.clone();
            diff.axpy(C64::new(-1.0, 0.0), &rho_prev);
            distance = diff.frobenius_norm();
            rho_prev = rho;
            let energy: f64 = states
                .iter()
                .zip(&weights)
                .map(|(s, w)| w * energy_canonical(s, &local))
                .sum();
            log.push(LogEntry {
                dtau,
                iteration: total,
                distance,
                energy,
                bond_dim: states.iter().map(MpsUnitCell::max_bond_dim).max().unwrap_or(0),
                discarded_weight: discarded,
            });
            if distance < schedule.threshold() {
                converged = true;
                break;
            }
        }
        if !converged {
            all_converged = false;
            log::warn!(
                "iTEBD {} at dtau {dtau}: no convergence after {iterations} iterations (distance {distance:.3e})",
                mode.as_str()
            );
        }
        for s in states.iter_mut() {
            s.canonicalize(bond_dim, cutoff)?;
        }
        rho_prev = cell_rdm(&states);
        stages.push(StageReport {
            dtau,
            iterations,
            converged,
            last_distance: distance,
        });
    }

    let (energy, mixed_radii) = match combine {
        Combine::Trajectories => {
            let mut e = 0.0;
            for (s, w) in states.iter().zip(&weights) {
                e += w * energy_density(s, &local)?;
            }
            (e, Vec::new())
        }
        Combine::Lcu => lcu_energy_density(&states, &weights, &local)?,
    };
    Ok(ItebdRun {
        mode,
        combine,
        states,
        weights,
        energy,
        iterations: total,
        converged: all_converged,
        stages,
        log,
        mixed_radii,
    })
}

impl ItebdRun {
    /// One-line summary for logs.
    pub fn summary(&self) -> String {
        alloc::format!(
            "{} ({:?}): energy {:.10} after {} iterations, converged = {}",
            self.mode.as_str(),
            self.combine,
            self.energy,
            self.iterations,
            self.converged
        )
    }
}

#[cfg(test)]
mod tests;
