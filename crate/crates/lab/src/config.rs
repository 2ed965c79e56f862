//! TOML experiment configs.
//!
//! A config names its experiment and a seed; every other field has a
//! default. Unknown fields are rejected. The `[model]` table takes `name`
//! plus the numeric parameters accepted by `nusc_core::pauli::build_model`.
//!
//! ```toml
//! experiment = "loss_vs_p"
//! seed = 7
//! t = 0.3
//! orders = [2, 8]
//!
//! [model]
//! name = "xy_chain"
//! n = 6
//! h = 1.0
//! ```

use std::collections::BTreeMap;

use nusc_core::itebd::{Combine, FormulaMode};
use nusc_core::pauli::{build_model, HamiltonianSpec};
use nusc_core::symmetry::SymmetryKind;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

impl ModelConfig {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        ModelConfig {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn build(&self) -> LabResult<HamiltonianSpec> {
        build_model(&self.name, &self.params).map_err(|e| LabError::config("model", e.to_string()))
    }

    /// The same model with one parameter replaced.
    pub fn with(&self, key: &str, value: f64) -> Self {
        let mut m = self.clone();
        m.params.insert(key.to_string(), value);
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMethodKind {
    Analytic,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    /// Exact output distributions (the infinite-shot limit).
    Exact,
    /// Multinomial shot counts.
    Shots,
}

fn xy_chain() -> ModelConfig {
    ModelConfig::new("xy_chain", &[("n", 6.0), ("h", 1.0)])
}
fn ising() -> ModelConfig {
    ModelConfig::new("ising_tl", &[("n", 5.0), ("mu", 2.0), ("lambda", 2.0)])
}
fn heisenberg_chain() -> ModelConfig {
    ModelConfig::new("heisenberg_chain", &[("n", 4.0)])
}
fn bernstein_model() -> ModelConfig {
    ModelConfig::new("powerlaw_heisenberg", &[("n", 4.0), ("alpha", 1.0)])
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $value:expr;)*) => {
        $(fn $name() -> $ty { $value })*
    };
}

defaults! {
    t_short: f64 = 0.3;
    t_long: f64 = 100.0;
    orders_p: Vec<usize> = vec![2, 4, 6, 8];
    orders_dev: Vec<usize> = vec![2, 4];
    points: usize = 21;
    analytic: LossMethodKind = LossMethodKind::Analytic;
    samples_mc: usize = 1000;
    weights_dev: Vec<f64> = vec![0.0, 0.5, 1.0];
    sample_counts: Vec<usize> = vec![10, 30, 100, 300, 1000];
    batches: usize = 20;
    sizes_alpha: Vec<usize> = vec![4, 8];
    alphas_long: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];
    alphas_sym: Vec<f64> = vec![0.0, 1.0, 2.0, 4.0];
    alphas_size: Vec<f64> = vec![0.0, 0.5, 1.0, 2.0];
    k2: usize = 2;
    steps_long: u64 = 20_000;
    n6: usize = 6;
    n4: usize = 4;
    zero: f64 = 0.0;
    dt_steps: f64 = 0.005;
    steps_list: Vec<u64> = vec![10, 100, 1000, 10_000, 20_000];
    dt_sym: f64 = 2e-3;
    steps_sym: u64 = 50_000;
    steps_sym_list: Vec<u64> = vec![10, 100, 1000, 10_000, 50_000];
    ordering_sym: Vec<usize> = vec![0, 2, 1];
    hadamard: SymmetryKind = SymmetryKind::HadamardGlobal;
    haar: SymmetryKind = SymmetryKind::HaarGlobal;
    half: f64 = 0.5;
    sizes_sym: Vec<usize> = vec![4, 5, 6, 7, 8];
    m10: usize = 10;
    m_list: Vec<usize> = vec![4, 8, 16, 32, 50, 64];
    generator_order: usize = 6;
    delta_gen: f64 = 0.01;
    itebd_modes: Vec<FormulaMode> = vec![FormulaMode::K1, FormulaMode::AveragedK1, FormulaMode::K2, FormulaMode::AveragedK2];
    trajectories: Combine = Combine::Trajectories;
    dtau_list: Vec<f64> = vec![0.1, 0.01, 0.001];
    threshold: f64 = 1e-10;
    max_iterations: usize = 100_000;
    bond_dim: usize = 32;
    cutoff: f64 = 1e-12;
    one: usize = 1;
    steps_bern: u64 = 100;
    t_bern: f64 = 1.0;
    samples_bern: Vec<usize> = vec![4, 8, 16, 32];
    trials: usize = 200;
    delta_bern: f64 = 0.1;
    times_shots: Vec<f64> = vec![0.05];
    shot_mode: ShotMode = ShotMode::Shots;
    shots: u64 = nusc_core::shots::DEFAULT_SHOTS;
    repetitions: usize = 50;
    yes: bool = true;
}

/// Two-formula weight scan (orderings (A,B) and (B,A)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossVsP {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "xy_chain")]
    pub model: ModelConfig,
    #[serde(default = "t_short")]
    pub t: f64,
    #[serde(default = "orders_p")]
    pub orders: Vec<usize>,
    /// Grid points on `p ∈ [0, 1]`, the weight of the (A,B) formula.
    #[serde(default = "points")]
    pub points: usize,
    #[serde(default = "analytic")]
    pub loss_method: LossMethodKind,
    #[serde(default = "samples_mc")]
    pub samples: usize,
}

/// Batch-to-batch spread of the Monte-Carlo loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationVsSamples {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "xy_chain")]
    pub model: ModelConfig,
    #[serde(default = "t_short")]
    pub t: f64,
    #[serde(default = "orders_dev")]
    pub orders: Vec<usize>,
    #[serde(default = "weights_dev")]
    pub weights: Vec<f64>,
    #[serde(default = "sample_counts")]
    pub sample_counts: Vec<usize>,
    #[serde(default = "batches")]
    pub batches: usize,
}

/// Mixture of all orderings against one ordering, over `α` and `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongtimeAlphaScan {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "sizes_alpha")]
    pub sizes: Vec<usize>,
    #[serde(default = "alphas_long")]
    pub alphas: Vec<f64>,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "t_long")]
    pub t: f64,
    #[serde(default = "steps_long")]
    pub steps: u64,
}

/// Loss against the number of steps at fixed `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossVsSteps {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "n6")]
    pub n: usize,
    #[serde(default = "zero")]
    pub alpha: f64,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "dt_steps")]
    pub dt: f64,
    #[serde(default = "steps_list")]
    pub steps: Vec<u64>,
}

/// Two-element symmetry mixture over the weight `p` of the bare circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryPScan {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "n6")]
    pub n: usize,
    #[serde(default = "alphas_sym")]
    pub alphas: Vec<f64>,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "ordering_sym")]
    pub ordering: Vec<usize>,
    #[serde(default = "dt_sym")]
    pub dt: f64,
    #[serde(default = "steps_sym")]
    pub steps: u64,
    #[serde(default = "points")]
    pub points: usize,
    #[serde(default = "hadamard")]
    pub symmetry: SymmetryKind,
}

/// Symmetry mixture at fixed weight against the number of steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySteps {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "n6")]
    pub n: usize,
    #[serde(default = "alphas_sym")]
    pub alphas: Vec<f64>,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "ordering_sym")]
    pub ordering: Vec<usize>,
    #[serde(default = "dt_sym")]
    pub dt: f64,
    #[serde(default = "steps_sym_list")]
    pub steps: Vec<u64>,
    #[serde(default = "half")]
    pub p: f64,
    #[serde(default = "hadamard")]
    pub symmetry: SymmetryKind,
}

/// Random global rotations against system size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySizeScan {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "sizes_sym")]
    pub sizes: Vec<usize>,
    #[serde(default = "alphas_size")]
    pub alphas: Vec<f64>,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "ordering_sym")]
    pub ordering: Vec<usize>,
    #[serde(default = "dt_sym")]
    pub dt: f64,
    #[serde(default = "steps_sym")]
    pub steps: u64,
    #[serde(default = "m10")]
    pub m: usize,
    #[serde(default = "haar")]
    pub symmetry: SymmetryKind,
}

/// Generator-power suppression and Haar-rotation loss against `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryMScan {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "n4")]
    pub n: usize,
    #[serde(default = "alphas_sym")]
    pub alphas: Vec<f64>,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "dt_sym")]
    pub dt: f64,
    #[serde(default = "steps_sym")]
    pub steps: u64,
    #[serde(default = "m_list")]
    pub m_list: Vec<usize>,
    /// Order of the formula whose leading error is fed to the generator scan.
    #[serde(default = "generator_order")]
    pub generator_order: usize,
    #[serde(default = "delta_gen")]
    pub delta: f64,
}

/// Imaginary-time iTEBD with plain and averaged formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItebdConvergence {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "heisenberg_chain")]
    pub model: ModelConfig,
    #[serde(default = "itebd_modes")]
    pub modes: Vec<FormulaMode>,
    #[serde(default = "trajectories")]
    pub combine: Combine,
    #[serde(default = "dtau_list")]
    pub dtau_list: Vec<f64>,
    #[serde(default = "threshold")]
    pub threshold: f64,
    #[serde(default = "max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "bond_dim")]
    pub bond_dim: usize,
    #[serde(default = "cutoff")]
    pub cutoff: f64,
    /// Keep every `log_stride`-th log row (plus the last of each stage).
    #[serde(default = "one")]
    pub log_stride: usize,
    /// Ring sizes for the exact-diagonalization reference; empty to skip.
    #[serde(default)]
    pub ed_sizes: Vec<usize>,
}

/// Sampled-ordering fluctuations against the concentration bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinTrials {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "bernstein_model")]
    pub model: ModelConfig,
    #[serde(default = "k2")]
    pub k: usize,
    #[serde(default = "steps_bern")]
    pub steps: u64,
    #[serde(default = "t_bern")]
    pub t: f64,
    #[serde(default = "samples_bern")]
    pub samples: Vec<usize>,
    #[serde(default = "trials")]
    pub trials: usize,
    #[serde(default = "delta_bern")]
    pub delta: f64,
}

/// One-step first-order formulas measured in the computational basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotsTvd {
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "ising")]
    pub model: ModelConfig,
    #[serde(default = "times_shots")]
    pub times: Vec<f64>,
    #[serde(default = "shot_mode")]
    pub mode: ShotMode,
    /// Shots per channel; the average splits them between its two circuits.
    #[serde(default = "shots")]
    pub shots: u64,
    /// Independent shot seeds per time.
    #[serde(default = "repetitions")]
    pub repetitions: usize,
    #[serde(default = "yes")]
    pub histograms: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    LossVsP(LossVsP),
    DeviationVsSamples(DeviationVsSamples),
    LongtimeAlphaScan(LongtimeAlphaScan),
    LossVsSteps(LossVsSteps),
    SymmetryPScan(SymmetryPScan),
    SymmetrySteps(SymmetrySteps),
    SymmetrySizeScan(SymmetrySizeScan),
    #[serde(rename = "symmetry_M_scan")]
    SymmetryMScan(SymmetryMScan),
    ItebdConvergence(ItebdConvergence),
    BernsteinTrials(BernsteinTrials),
    ShotsTvd(ShotsTvd),
}

/// Experiment ids in CLI order.
pub const EXPERIMENT_IDS: [&str; 11] = [
    "loss_vs_p",
    "deviation_vs_samples",
    "longtime_alpha_scan",
    "loss_vs_steps",
    "symmetry_p_scan",
    "symmetry_steps",
    "symmetry_size_scan",
    "symmetry_M_scan",
    "itebd_convergence",
    "bernstein_trials",
    "shots_tvd",
];

macro_rules! each {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            ExperimentConfig::LossVsP($c) => $body,
            ExperimentConfig::DeviationVsSamples($c) => $body,
            ExperimentConfig::LongtimeAlphaScan($c) => $body,
            ExperimentConfig::LossVsSteps($c) => $body,
            ExperimentConfig::SymmetryPScan($c) => $body,
            ExperimentConfig::SymmetrySteps($c) => $body,
            ExperimentConfig::SymmetrySizeScan($c) => $body,
            ExperimentConfig::SymmetryMScan($c) => $body,
            ExperimentConfig::ItebdConvergence($c) => $body,
            ExperimentConfig::BernsteinTrials($c) => $body,
            ExperimentConfig::ShotsTvd($c) => $body,
        }
    };
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> LabResult<Self> {
        Ok(toml::from_str(text)?)
    }

    /// A config with every field at its default.
    pub fn with_defaults(id: &str, seed: u64) -> LabResult<Self> {
        Self::parse(&format!("experiment = \"{id}\"\nseed = {seed}\n"))
    }

    pub fn id(&self) -> &'static str {
        let i = match self {
            ExperimentConfig::LossVsP(_) => 0,
            ExperimentConfig::DeviationVsSamples(_) => 1,
            ExperimentConfig::LongtimeAlphaScan(_) => 2,
            ExperimentConfig::LossVsSteps(_) => 3,
            ExperimentConfig::SymmetryPScan(_) => 4,
            ExperimentConfig::SymmetrySteps(_) => 5,
            ExperimentConfig::SymmetrySizeScan(_) => 6,
            ExperimentConfig::SymmetryMScan(_) => 7,
            ExperimentConfig::ItebdConvergence(_) => 8,
            ExperimentConfig::BernsteinTrials(_) => 9,
            ExperimentConfig::ShotsTvd(_) => 10,
        };
        EXPERIMENT_IDS[i]
    }

    pub fn seed(&self) -> u64 {
        each!(self, c => c.seed)
    }

    pub fn set_seed(&mut self, seed: u64) {
        each!(self, c => c.seed = seed)
    }

    /// File stem for the CSV output.
    pub fn output_stem(&self) -> String {
        each!(self, c => c.output.clone()).unwrap_or_else(|| self.id().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_parses_with_defaults() {
        for id in EXPERIMENT_IDS {
            let c = ExperimentConfig::with_defaults(id, 3).unwrap();
            assert_eq!(c.id(), id);
            assert_eq!(c.seed(), 3);
            let again = ExperimentConfig::parse(&c.to_toml()).unwrap();
            assert_eq!(again, c);
        }
    }

    #[test]
    fn unknown_fields_and_missing_seed_are_rejected() {
        let e = ExperimentConfig::parse("experiment = \"loss_vs_p\"\nseed = 1\nbogus = 2\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert!(ExperimentConfig::parse("experiment = \"loss_vs_p\"\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"nope\"\nseed = 1\n").is_err());
    }

    #[test]
    fn model_table_accepts_integers_and_rejects_unknown_parameters() {
        let c = ExperimentConfig::parse(
            "experiment = \"loss_vs_p\"\nseed = 1\n[model]\nname = \"xy_chain\"\nn = 4\nh = 1\n",
        )
        .unwrap();
        let ExperimentConfig::LossVsP(l) = c else { panic!() };
        assert_eq!(l.model.build().unwrap().n(), 4);
        let bad = l.model.with("mu", 1.0).build().unwrap_err();
        assert_eq!(bad.exit_code(), 2);
    }
}
