//! Measurement statistics of one-step first-order formulas.
//!
//! A two-group Hamiltonian `A + B` is simulated for one step by
//! `e^{-iAt}e^{-iBt}`, by `e^{-iBt}e^{-iAt}`, or by their equal-weight
//! average, starting from `|+⟩^{⊗n}`. The output distribution in the
//! computational basis is compared with the exact one by total variation
//! distance, either exactly or from multinomial shot counts. For the average
//! the shots are split between the two circuits and the histograms pooled.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::distr::Distribution;
use rand_distr::Binomial;

use crate::error::{Error, Result};
use crate::formulas::{make_formula, Compiler};
use crate::linalg::C64;
use crate::pauli::HamiltonianSpec;
use crate::rng::{rng, Rng};

/// Default number of shots per experiment.
pub const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShotChannel {
    /// `e^{-iAt} e^{-iBt}`
    Ab,
    /// `e^{-iBt} e^{-iAt}`
    Ba,
    /// Both circuits with weight ½.
    Averaged,
}

impl ShotChannel {
    pub const ALL: [ShotChannel; 3] = [ShotChannel::Ab, ShotChannel::Ba, ShotChannel::Averaged];

    pub fn as_str(self) -> &'static str {
        match self {
            ShotChannel::Ab => "ab",
            ShotChannel::Ba => "ba",
            ShotChannel::Averaged => "averaged",
        }
    }
}

/// Exact output distributions of the exact evolution and both circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct Distributions {
    pub exact: Vec<f64>,
    pub ab: Vec<f64>,
    pub ba: Vec<f64>,
}

impl Distributions {
    /// The channel's output distribution (the mixture for the average).
    pub fn channel(&self, c: ShotChannel) -> Vec<f64> {
        match c {
            ShotChannel::Ab => self.ab.clone(),
            ShotChannel::Ba => self.ba.clone(),
            ShotChannel::Averaged => self.ab.iter().zip(&self.ba).map(|(x, y)| 0.5 * (x + y)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotOutcome {
    pub channel: ShotChannel,
    /// Total shots, `None` in exact mode.
    pub shots: Option<u64>,
    /// Per-bitstring counts (pooled for the average); empty in exact mode.
    pub counts: Vec<u64>,
    /// Estimated (or exact) output distribution.
    pub distribution: Vec<f64>,
    pub tvd: f64,
}

/// `|+⟩^{⊗n}`.
pub fn plus_state(n: usize) -> Vec<C64> {
    let d = 1usize << n;
    vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d]
}

/// `½ Σ_u |p_u − q_u|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Output distributions after time `t` (one step) from `|+⟩^{⊗n}`.
pub fn distributions(spec: &HamiltonianSpec, t: f64) -> Result<Distributions> {
    if spec.num_groups() != 2 {
        return Err(Error::param("model", "shot experiments need exactly two groups"));
    }
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    let psi = plus_state(spec.n());
    let mut compiler = Compiler::new(spec)?;
    let probs = |v: Vec<C64>| -> Vec<f64> { v.iter().map(|z| z.norm_sqr()).collect() };
    let exact = probs(compiler.exact(t)?.apply(&psi));
    let ab = probs(compiler.compile(&make_formula(1, &[0, 1])?, t)?.apply(&psi));
    let ba = probs(compiler.compile(&make_formula(1, &[1, 0])?, t)?.apply(&psi));
    Ok(Distributions { exact, ab, ba })
}

/// Draws `n` shots from `p` (multinomial, by sequential binomials).
pub fn multinomial(p: &[f64], n: u64, r: &mut Rng) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; p.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q)
            .map_err(|e| Error::Numerical(alloc::format!("binomial draw: {e}")))?
            .sample(r);
        counts[i] = k;
        left -= k;
        mass -= pi;
    }
    Ok(counts)
}

/// TVD of `channel` against the exact distribution. With `shots = None`
/// the channel's exact output distribution is used; otherwise `shots` are
/// drawn (split as `⌈N/2⌉, ⌊N/2⌋` for the average) and pooled.
pub fn run_shots(
    spec: &HamiltonianSpec,
    t: f64,
    channel: ShotChannel,
    shots: Option<u64>,
    seed: u64,
) -> Result<ShotOutcome> {
    let dist = distributions(spec, t)?;
    shots_from(&dist, channel, shots, seed)
}

/// [`run_shots`] with precomputed distributions.
pub fn shots_from(
    dist: &Distributions,
    channel: ShotChannel,
    shots: Option<u64>,
    seed: u64,
) -> Result<ShotOutcome> {
    let Some(n) = shots else {
        let p = dist.channel(channel);
        return Ok(ShotOutcome {
            channel,
            shots: None,
            counts: Vec::new(),
            tvd: total_variation(&p, &dist.exact),
            distribution: p,
        });
    };
    if n < 1 {
        return Err(Error::param("n_shot", "need at least one shot"));
    }
    let mut r = rng(seed);
    let counts = match channel {
        ShotChannel::Ab => multinomial(&dist.ab, n, &mut r)?,
        ShotChannel::Ba => multinomial(&dist.ba, n, &mut r)?,
        ShotChannel::Averaged => {
            let second = n / 2;
            let first = n - second;
            if first != second {
                log::info!("{n} shots do not split evenly; the first circuit gets {first}");
            }
            let a = multinomial(&dist.ab, first, &mut r)?;
            let b = multinomial(&dist.ba, second, &mut r)?;
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        }
    };
    let distribution: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(ShotOutcome {
        channel,
        shots: Some(n),
        tvd: total_variation(&distribution, &dist.exact),
        counts,
        distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit;
    use crate::pauli::Model;

    fn ising(mu: f64, lambda: f64) -> HamiltonianSpec {
        Model::IsingTl { n: 5, mu, lambda }.build().unwrap()
    }

    #[test]
    fn zero_time_has_only_sampling_noise() {
        let spec = ising(2.0, 2.0);
        for c in ShotChannel::ALL {
            let exact = run_shots(&spec, 0.0, c, None, 0).unwrap();
            assert!(exact.tvd < 1e-14);
            let sampled = run_shots(&spec, 0.0, c, Some(10_000), 3).unwrap();
            assert_eq!(sampled.counts.iter().sum::<u64>(), 10_000);
            // E[TVD] ≈ ½ Σ sqrt(2 p(1-p) / (π N)) ≈ sqrt(d / (2πN)) for uniform p.
            let scale = (32.0f64 / 10_000.0).sqrt();
            assert!(sampled.tvd < scale, "{}", sampled.tvd);
            assert!(sampled.tvd > 0.1 * scale);
        }
    }

    #[test]
    fn averaged_beats_both_orderings_exactly() {
        let spec = ising(2.0, 2.0);
        let tvd = |c| run_shots(&spec, 0.05, c, None, 0).unwrap().tvd;
        let avg = tvd(ShotChannel::Averaged);
        assert!(avg < tvd(ShotChannel::Ab).min(tvd(ShotChannel::Ba)));
    }

    #[test]
    fn averaging_removes_the_second_order_term() {
        let spec = ising(2.0, 2.0);
        let ts = [0.0125, 0.025, 0.05, 0.1];
        let slope = |c| {
            let y: Vec<f64> = ts.iter().map(|&t| run_shots(&spec, t, c, None, 0).unwrap().tvd).collect();
            fit::log_log(&ts, &y).unwrap().slope
        };
        let avg = slope(ShotChannel::Averaged);
        assert!(avg >= 2.7, "averaged slope {avg}");
        for c in [ShotChannel::Ab, ShotChannel::Ba] {
            let s = slope(c);
            assert!((s - 2.0).abs() < 0.2, "{} slope {s}", c.as_str());
        }
    }

    #[test]
    fn odd_shot_counts_go_to_the_first_circuit() {
        let spec = ising(2.0, 2.0);
        let o = run_shots(&spec, 0.05, ShotChannel::Averaged, Some(7), 1).unwrap();
        assert_eq!(o.counts.iter().sum::<u64>(), 7);
        assert!(run_shots(&spec, 0.05, ShotChannel::Ab, Some(0), 1).is_err());
    }

    #[test]
    fn multinomial_frequencies_and_determinism() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let a = multinomial(&p, 100_000, &mut rng(4)).unwrap();
        let b = multinomial(&p, 100_000, &mut rng(4)).unwrap();
        assert_eq!(a, b);
        for (c, pi) in a.iter().zip(p) {
            assert!((*c as f64 / 1e5 - pi).abs() < 0.005);
        }
    }
}
