//! Experiment runners. Each turns a config into one or more tables; rows
//! are a pure function of the config.

mod bernstein;
mod itebd;
mod mixtures;
mod shots;
mod symmetry;

use nusc_core::channels::{loss_analytic, MixedChannel};
use nusc_core::pauli::{HamiltonianSpec, Model};
use nusc_core::rng::substream;
use nusc_core::Matrix;
use rand::RngCore;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::table::Table;

/// Tables plus free-text lines for the provenance header.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl Outcome {
    /// The table with the given suffix (`""` for the main one).
    pub fn table(&self, suffix: &str) -> &Table {
        self.tables
            .iter()
            .find(|t| t.suffix == suffix)
            .unwrap_or_else(|| panic!("no table `{suffix}`"))
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> LabResult<Outcome> {
    log::info!("running {} (seed {})", config.id(), config.seed());
    match config {
        ExperimentConfig::LossVsP(c) => mixtures::loss_vs_p(c),
        ExperimentConfig::DeviationVsSamples(c) => mixtures::deviation_vs_samples(c),
        ExperimentConfig::LongtimeAlphaScan(c) => mixtures::longtime_alpha_scan(c),
        ExperimentConfig::LossVsSteps(c) => mixtures::loss_vs_steps(c),
        ExperimentConfig::SymmetryPScan(c) => symmetry::p_scan(c),
        ExperimentConfig::SymmetrySteps(c) => symmetry::steps(c),
        ExperimentConfig::SymmetrySizeScan(c) => symmetry::size_scan(c),
        ExperimentConfig::SymmetryMScan(c) => symmetry::m_scan(c),
        ExperimentConfig::ItebdConvergence(c) => itebd::convergence(c),
        ExperimentConfig::BernsteinTrials(c) => bernstein::trials(c),
        ExperimentConfig::ShotsTvd(c) => shots::tvd(c),
    }
}

pub(crate) fn powerlaw(n: usize, alpha: f64) -> LabResult<HamiltonianSpec> {
    Ok(Model::PowerlawHeisenberg { n, alpha }.build()?)
}

/// Haar-averaged loss of a weighted mixture.
pub(crate) fn loss(unitaries: &[Matrix], weights: &[f64], v: &Matrix) -> LabResult<f64> {
    let ch = MixedChannel::new(unitaries.to_vec(), weights.to_vec())?;
    Ok(loss_analytic(&ch, v)?.value)
}

pub(crate) fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

/// Seed for work item `index` under the config seed.
pub(crate) fn item_seed(seed: u64, index: u64) -> u64 {
    substream(seed, index).next_u64()
}

/// `points` evenly spaced values on `[0, 1]`.
pub(crate) fn unit_grid(points: usize) -> LabResult<Vec<f64>> {
    if points < 2 {
        return Err(LabError::config("points", "need at least two grid points"));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

pub(crate) fn require_nonempty<T>(field: &str, v: &[T]) -> LabResult<()> {
    if v.is_empty() {
        return Err(LabError::config(field, "must not be empty"));
    }
    Ok(())
}

pub(crate) fn require_positive(field: &str, x: f64) -> LabResult<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(LabError::config(field, "must be positive and finite"));
    }
    Ok(())
}

/// Runs `f` over `items` on the rayon pool, keeping input order.
pub(crate) fn par_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> LabResult<R> + Sync + Send,
) -> LabResult<Vec<R>> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}
