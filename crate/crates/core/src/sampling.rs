//! Randomly sampled term orderings and the concentration of their average.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::error_structure::decompose_commuting;
use crate::formulas::{all_orderings_capped, make_formula, Compiler};
use crate::linalg::{spectral_norm, Matrix, C64};
use crate::pauli::HamiltonianSpec;
use crate::rng::rng;
use crate::channels::series_error_coefficient;

/// Largest `Γ!` for which the exact mean over orderings is formed.
pub const EXACT_MEAN_CAP: usize = 24;

/// `T` uniform draws, with replacement, from the `Γ!` orderings of
/// `0..Γ`.
pub fn sample_orderings(gamma: usize, t: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if gamma < 1 {
        return Err(Error::param("gamma", "need at least one group"));
    }
    let mut r = rng(seed);
    Ok((0..t)
        .map(|_| {
            let mut p: Vec<usize> = (0..gamma).collect();
            p.shuffle(&mut r);
            p
        })
        .collect())
}

/// One fluctuation measurement.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluctuationTrial {
    pub samples: usize,
    pub steps: u64,
    pub time: f64,
    /// Leading error order of one step.
    pub q: usize,
    /// `‖(1/T) Σ_j U_(j)(N, Δt) − E[U_m(N, Δt)]‖₂`.
    pub observed_norm: f64,
    pub bound_epsilon: f64,
    pub seed: u64,
}

/// All `Γ!` `N`-step evolutions of one formula order and their exact mean,
/// reused across trials.
#[derive(Clone, Debug)]
pub struct FluctuationSetup {
    orderings: Vec<Vec<usize>>,
    evolutions: Vec<Matrix>,
    mean: Matrix,
    order: usize,
    steps: u64,
    time: f64,
}

impl FluctuationSetup {
    pub fn new(spec: &HamiltonianSpec, k: usize, steps: u64, time: f64) -> Result<Self> {
        if steps < 1 {
            return Err(Error::param("N", "need at least one step"));
        }
        if !(time > 0.0) {
            return Err(Error::param("t", "must be positive"));
        }
        let orderings = all_orderings_capped(spec.num_groups(), EXACT_MEAN_CAP)?;
        let mut comp = Compiler::new(spec)?;
        let dt = time / steps as f64;
        let mut evolutions = Vec::with_capacity(orderings.len());
        for o in &orderings {
            let c = make_formula(k, o)?;
            evolutions.push(comp.compile_steps(&c, dt, steps)?);
        }
        let d = spec.dim();
        let mut mean = Matrix::zeros(d, d);
        let w = C64::new(1.0 / orderings.len() as f64, 0.0);
        for u in &evolutions {
            mean.axpy(w, u);
        }
        Ok(FluctuationSetup {
            orderings,
            evolutions,
            mean,
            order: k,
            steps,
            time,
        })
    }

    pub fn orderings(&self) -> &[Vec<usize>] {
        &self.orderings
    }

    pub fn mean(&self) -> &Matrix {
        &self.mean
    }

    /// Leading error order `q = k + 1` of one step.
    pub fn q(&self) -> usize {
        self.order + 1
    }

    /// Spectral norm of the fluctuation for a given list of draws.
    pub fn observed_norm(&self, draws: &[Vec<usize>]) -> Result<f64> {
        if draws.is_empty() {
            return Err(Error::param("T", "need at least one sample"));
        }
        let mut avg = self.mean.scale_real(-1.0);
        let w = C64::new(1.0 / draws.len() as f64, 0.0);
        for o in draws {
            let i = self
                .orderings
                .iter()
                .position(|x| x == o)
                .ok_or_else(|| Error::InvalidOrdering(o.clone()))?;
            avg.axpy(w, &self.evolutions[i]);
        }
        spectral_norm(&avg)
    }

    /// Draws `T` orderings under `seed` and compares with `bound_epsilon`.
    pub fn trial(&self, samples: usize, seed: u64, bound_epsilon: f64) -> Result<FluctuationTrial> {
        let gamma = self.orderings[0].len();
        let draws = sample_orderings(gamma, samples, seed)?;
        Ok(FluctuationTrial {
            samples,
            steps: self.steps,
            time: self.time,
            q: self.q(),
            observed_norm: self.observed_norm(&draws)?,
            bound_epsilon,
            seed,
        })
    }
}

/// One fluctuation trial with `T` sampled orderings. `bound_epsilon` is
/// left at zero; see [`bernstein_epsilon`].
pub fn fluctuation_norm(spec: &HamiltonianSpec, k: usize, samples: usize, steps: u64, time: f64, seed: u64) -> Result<FluctuationTrial> {
    FluctuationSetup::new(spec, k, steps, time)?.trial(samples, seed, 0.0)
}

fn check_bound_args(samples: f64, steps: f64, time: f64, q: usize, gamma: f64, n: usize) -> Result<()> {
    for (name, v) in [("T", samples), ("N", steps), ("t", time), ("gamma", gamma)] {
        if !(v > 0.0) {
            return Err(Error::param(name, "must be positive"));
        }
    }
    if q < 1 || n < 1 {
        return Err(Error::param("q", "q and n must be at least 1"));
    }
    Ok(())
}

/// `ε` solving `2d·exp(−3T²N^{2q−1}ε²/(8γ²t^{2q})) = δ` with `d = 2ⁿ`.
pub fn bernstein_epsilon(samples: usize, steps: u64, time: f64, q: usize, gamma: f64, n: usize, delta: f64) -> Result<f64> {
    let (tf, nf) = (samples as f64, steps as f64);
    check_bound_args(tf, nf, time, q, gamma, n)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    let d = (n as f64) * core::f64::consts::LN_2;
    let log_term = core::f64::consts::LN_2 + d - delta.ln();
    let rate = 3.0 * tf * tf * nf.powi(2 * q as i32 - 1) / (8.0 * gamma * gamma * time.powi(2 * q as i32));
    Ok((log_term / rate).sqrt())
}

/// Forward form: the failure probability bound at a given `ε`.
pub fn bernstein_delta(samples: usize, steps: u64, time: f64, q: usize, gamma: f64, n: usize, epsilon: f64) -> Result<f64> {
    let (tf, nf) = (samples as f64, steps as f64);
    check_bound_args(tf, nf, time, q, gamma, n)?;
    let exponent = -3.0 * tf * tf * nf.powi(2 * q as i32 - 1) * epsilon * epsilon / (8.0 * gamma * gamma * time.powi(2 * q as i32));
    Ok(2.0 * (n as f64 * core::f64::consts::LN_2).exp() * exponent.exp())
}

/// `γ = max_m ‖E_m^{(q)}‖₂ + ‖ξ_m^{(q)}‖₂` over all orderings of the
/// order-`k` formula, with `q = k + 1`.
pub fn bernstein_gamma(spec: &HamiltonianSpec, k: usize) -> Result<f64> {
    let h = spec.dense()?;
    let mut best = 0.0f64;
    for o in all_orderings_capped(spec.num_groups(), EXACT_MEAN_CAP)? {
        let c = make_formula(k, &o)?;
        let e = series_error_coefficient(&c, spec, c.error_order())?;
        let xi = decompose_commuting(&e, &h)?.xi;
        best = best.max(spectral_norm(&e)? + spectral_norm(&xi)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Model;

    #[test]
    fn single_group_draws() {
        let d = sample_orderings(1, 5, 3).unwrap();
        assert!(d.iter().all(|p| p == &alloc::vec![0]));
        assert!(sample_orderings(0, 1, 0).is_err());
        assert_eq!(sample_orderings(3, 10, 7).unwrap(), sample_orderings(3, 10, 7).unwrap());
    }

    #[test]
    fn draw_frequencies_are_uniform() {
        let d = sample_orderings(3, 6000, 11).unwrap();
        let all = crate::formulas::all_orderings(3).unwrap();
        let tol = 5.0 * (1000.0f64 * 5.0 / 6.0).sqrt();
        for o in &all {
            let count = d.iter().filter(|x| *x == o).count() as f64;
            assert!((count - 1000.0).abs() <= tol, "{o:?} {count}");
        }
    }

    #[test]
    fn bound_inverts() {
        let eps = bernstein_epsilon(8, 100, 1.0, 3, 2.5, 4, 0.1).unwrap();
        let delta = bernstein_delta(8, 100, 1.0, 3, 2.5, 4, eps).unwrap();
        assert!((delta - 0.1).abs() < 1e-10 * 0.1);
        let eps2 = bernstein_epsilon(16, 100, 1.0, 3, 2.5, 4, 0.1).unwrap();
        assert!((eps / eps2 - 2.0).abs() < 1e-12);
        let eps3 = bernstein_epsilon(8, 400, 1.0, 3, 2.5, 4, 0.1).unwrap();
        assert!((eps / eps3 - 4.0f64.powf(2.5)).abs() < 1e-9);
        assert!(bernstein_epsilon(8, 100, 1.0, 3, 2.5, 4, 1.0).is_err());
        assert!(bernstein_epsilon(8, 100, 1.0, 3, 2.5, 4, 0.0).is_err());
    }

    #[test]
    fn exact_coverage_gives_zero() {
        let spec = Model::PowerlawHeisenberg { n: 3, alpha: 1.0 }.build().unwrap();
        let setup = FluctuationSetup::new(&spec, 2, 10, 0.5).unwrap();
        let all = setup.orderings().to_vec();
        assert!(setup.observed_norm(&all).unwrap() < 1e-12);
        assert!(setup.trial(4, 1, 0.0).unwrap().observed_norm > 0.0);
    }

    #[test]
    fn commuting_groups_have_no_fluctuation() {
        let spec = Model::IsingTl { n: 3, mu: 1.0, lambda: 0.0 }.build().unwrap();
        // A single nonempty group plus an empty one: all orderings agree.
        let trial = fluctuation_norm(&spec, 1, 3, 5, 0.4, 2).unwrap();
        assert!(trial.observed_norm < 1e-12, "{}", trial.observed_norm);
    }
}
