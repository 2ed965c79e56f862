//! Mixtures of unitary circuits and their Haar-averaged distance from the
//! exact evolution.
//!
//! For a channel `ρ ↦ Σ p_m U_m ρ U_m†` and target `V` the loss is the Haar
//! average over pure states of `‖Σ p_m U_m ψψ† U_m† − V ψψ† V†‖_F²`.
//! Writing `g(X, Y) = d‖Y − X‖_F² − |Tr X†(Y − X)|²` (which equals
//! `d² − |Tr X†Y|²` for unitaries),
//!
//! ```text
//! L = [2 Σ_m p_m g(U_m, V) − Σ_{m,n} p_m p_n g(U_m, U_n)] / (d(d+1)).
//! ```
//!
//! Every quantity is formed from differences `U_m − V`, so a loss of order
//! `ε²` is computed to relative, not absolute, precision. The Monte-Carlo
//! estimator uses the per-state analogue
//! `h(a, b) = ‖b − a‖² − |⟨a|b − a⟩|² = 1 − |⟨a|b⟩|²`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::formulas::{Circuit, Compiler};
use crate::linalg::{dot, haar_state_from, norm_sqr, Matrix, C64, I};
use crate::pauli::{group_weight_squares, HamiltonianSpec};
use crate::rng::substream;

/// Losses below this are cancellation noise and are clamped to zero.
pub const NEGATIVE_LOSS_TOL: f64 = 1e-12;

/// Relative tolerance on `Σ p_m = 1`.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Cap on the number of grid points in [`grid_search_weights`].
pub const GRID_CAP: usize = 2_000_000;

/// `Σ p_m U_m ρ U_m†` as an explicit list of unitaries and weights.
#[derive(Clone, Debug)]
pub struct MixedChannel {
    unitaries: Vec<Matrix>,
    weights: Vec<f64>,
}

impl MixedChannel {
    pub fn new(unitaries: Vec<Matrix>, weights: Vec<f64>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::param("unitaries", "need at least one circuit"));
        }
        if unitaries.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: unitaries.len(),
                found: weights.len(),
            });
        }
        check_weights(&weights)?;
        let d = unitaries[0].check_square()?;
        for u in &unitaries {
            u.check_same_dim(&unitaries[0])?;
            let res = u.unitarity_residual();
            if !(res <= 1e-8 * (d as f64).sqrt()) {
                return Err(Error::param("unitaries", alloc::format!("unitarity residual {res:.3e}")));
            }
        }
        Ok(MixedChannel { unitaries, weights })
    }

    /// Equal weights `1/M`.
    pub fn uniform(unitaries: Vec<Matrix>) -> Result<Self> {
        let m = unitaries.len().max(1);
        MixedChannel::new(unitaries, vec![1.0 / m as f64; m])
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    /// `Σ p_m U_m ρ U_m†`.
    pub fn apply(&self, rho: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(rho.rows(), rho.cols());
        for (u, &p) in self.unitaries.iter().zip(&self.weights) {
            out.axpy(C64::new(p, 0.0), &u.matmul(rho).matmul(&u.adjoint()));
        }
        out
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::param("weights", "must be non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    if !((sum - 1.0).abs() <= WEIGHT_TOL) {
        return Err(Error::InvalidWeights { sum });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossKind {
    Analytic,
    MonteCarlo,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Analytic => "analytic",
            LossKind::MonteCarlo => "monte_carlo",
        }
    }
}

/// How to evaluate a loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossMethod {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossReport {
    pub value: f64,
    /// Standard error of the mean (0 for the analytic loss).
    pub stderr: f64,
    pub method: LossKind,
    pub samples: usize,
    pub seed: u64,
}

/// The loss as a quadratic form `pᵀ Q p` over the weight simplex, with
/// second moments for the Monte-Carlo standard error.
#[derive(Clone, Debug)]
pub struct LossQuadratic {
    m: usize,
    q: Vec<f64>,
    /// `mean_s Q^s_{ab} Q^s_{cd}`, row-major over `(a, b, c, d)`.
    second: Option<Vec<f64>>,
    method: LossKind,
    samples: usize,
    seed: u64,
}

impl LossQuadratic {
    pub fn new(unitaries: &[Matrix], v: &Matrix, method: LossMethod) -> Result<Self> {
        match method {
            LossMethod::Analytic => LossQuadratic::analytic(unitaries, v),
            LossMethod::MonteCarlo { samples, seed } => {
                LossQuadratic::monte_carlo(unitaries, v, samples, seed)
            }
        }
    }

    pub fn analytic(unitaries: &[Matrix], v: &Matrix) -> Result<Self> {
        let m = unitaries.len();
        if m == 0 {
            return Err(Error::param("unitaries", "need at least one circuit"));
        }
        let d = v.check_square()?;
        for u in unitaries {
            u.check_same_dim(v)?;
        }
        let df = d as f64;
        let diffs: Vec<Matrix> = unitaries.iter().map(|u| u - v).collect();
        // g(U_m, V) with Y − X = V − U_m = −D_m.
        let gv: Vec<f64> = unitaries
            .iter()
            .zip(&diffs)
            .map(|(u, dm)| df * dm.frobenius_norm_sqr() - u.inner(dm).norm_sqr())
            .collect();
        let mut q = vec![0.0; m * m];
        let norm = df * (df + 1.0);
        for a in 0..m {
            for b in 0..m {
                let gab = if a == b {
                    0.0
                } else {
                    let diff = &diffs[b] - &diffs[a];
                    df * diff.frobenius_norm_sqr() - unitaries[a].inner(&diff).norm_sqr()
                };
                q[a * m + b] = (gv[a] + gv[b] - gab) / norm;
            }
        }
        Ok(LossQuadratic {
            m,
            q,
            second: None,
            method: LossKind::Analytic,
            samples: 0,
            seed: 0,
        })
    }

    /// Sample `i` uses the Haar state drawn from stream `i` of `seed`.
    pub fn monte_carlo(unitaries: &[Matrix], v: &Matrix, samples: usize, seed: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::param("samples", "need at least two samples"));
        }
        let m = unitaries.len();
        let mut q = vec![0.0; m * m];
        let mut second = vec![0.0; m * m * m * m];
        let diffs = differences(unitaries, v)?;
        for s in 0..samples {
            let psi = haar_state_from(v.rows(), &mut substream(seed, s as u64))?;
            let qs = per_state_form(unitaries, &diffs, &psi);
            for (acc, x) in q.iter_mut().zip(&qs) {
                *acc += x;
            }
            for (ab, x) in qs.iter().enumerate() {
                for (cd, y) in qs.iter().enumerate() {
                    second[ab * m * m + cd] += x * y;
                }
            }
        }
        let inv = 1.0 / samples as f64;
        q.iter_mut().for_each(|x| *x *= inv);
        second.iter_mut().for_each(|x| *x *= inv);
        Ok(LossQuadratic {
            m,
            q,
            second: Some(second),
            method: LossKind::MonteCarlo,
            samples,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Loss at weights `p` (assumed on the simplex).
    pub fn eval(&self, p: &[f64]) -> Result<LossReport> {
        if p.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: p.len(),
            });
        }
        let m = self.m;
        let mut value = 0.0;
        for a in 0..m {
            for b in 0..m {
                value += p[a] * p[b] * self.q[a * m + b];
            }
        }
        let stderr = match &self.second {
            None => 0.0,
            Some(t) => {
                let mut pp = vec![0.0; m * m];
                for a in 0..m {
                    for b in 0..m {
                        pp[a * m + b] = p[a] * p[b];
                    }
                }
                let mut m2 = 0.0;
                for (ab, x) in pp.iter().enumerate() {
                    if *x == 0.0 {
                        continue;
                    }
                    let row = &t[ab * m * m..(ab + 1) * m * m];
                    m2 += x * row.iter().zip(&pp).map(|(t, y)| t * y).sum::<f64>();
                }
                let n = self.samples as f64;
                let var = (m2 - value * value).max(0.0) * n / (n - 1.0);
                (var / n).sqrt()
            }
        };
        Ok(LossReport {
            value: clamp_loss(value)?,
            stderr,
            method: self.method,
            samples: self.samples,
            seed: self.seed,
        })
    }
}

fn clamp_loss(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_LOSS_TOL {
        log::warn!("clamping loss {value:.3e} to zero");
        Ok(0.0)
    } else {
        Err(Error::Numerical(alloc::format!("negative loss {value:.3e}")))
    }
}

fn differences(unitaries: &[Matrix], v: &Matrix) -> Result<Vec<Matrix>> {
    v.check_square()?;
    unitaries
        .iter()
        .map(|u| {
            u.check_same_dim(v)?;
            Ok(u - v)
        })
        .collect()
}

/// `Q^ψ_{ab} = h(a_a, v) + h(a_b, v) − h(a_a, a_b)` for one state.
fn per_state_form(unitaries: &[Matrix], diffs: &[Matrix], psi: &[C64]) -> Vec<f64> {
    let m = unitaries.len();
    let a: Vec<Vec<C64>> = unitaries.iter().map(|u| u.apply(psi)).collect();
    let delta: Vec<Vec<C64>> = diffs.iter().map(|dm| dm.apply(psi)).collect();
    // h(a_m, v): b − a = v − a_m = −δ_m.
    let hv: Vec<f64> = (0..m)
        .map(|k| norm_sqr(&delta[k]) - dot(&a[k], &delta[k]).norm_sqr())
        .collect();
    let mut q = vec![0.0; m * m];
    for x in 0..m {
        for y in 0..m {
            let hxy = if x == y {
                0.0
            } else {
                let diff: Vec<C64> = delta[y].iter().zip(&delta[x]).map(|(p, q)| p - q).collect();
                norm_sqr(&diff) - dot(&a[x], &diff).norm_sqr()
            };
            q[x * m + y] = hv[x] + hv[y] - hxy;
        }
    }
    q
}

/// Loss of `ch` at the single state `psi`.
pub fn state_loss(ch: &MixedChannel, v: &Matrix, psi: &[C64]) -> Result<f64> {
    let diffs = differences(ch.unitaries(), v)?;
    let q = per_state_form(ch.unitaries(), &diffs, psi);
    let m = ch.len();
    let p = ch.weights();
    let mut value = 0.0;
    for a in 0..m {
        for b in 0..m {
            value += p[a] * p[b] * q[a * m + b];
        }
    }
    Ok(value)
}

/// Per-state losses for Haar samples `start .. start + count` of `seed`.
pub fn state_losses(ch: &MixedChannel, v: &Matrix, seed: u64, start: u64, count: usize) -> Result<Vec<f64>> {
    let diffs = differences(ch.unitaries(), v)?;
    let m = ch.len();
    let p = ch.weights();
    (0..count as u64)
        .map(|i| {
            let psi = haar_state_from(v.rows(), &mut substream(seed, start + i))?;
            let q = per_state_form(ch.unitaries(), &diffs, &psi);
            let mut value = 0.0;
            for a in 0..m {
                for b in 0..m {
                    value += p[a] * p[b] * q[a * m + b];
                }
            }
            Ok(value)
        })
        .collect()
}

/// Closed-form Haar average.
pub fn loss_analytic(ch: &MixedChannel, v: &Matrix) -> Result<LossReport> {
    if v.rows() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: v.rows(),
        });
    }
    LossQuadratic::analytic(ch.unitaries(), v)?.eval(ch.weights())
}

/// Sample mean over `samples` Haar states with its standard error.
pub fn loss_monte_carlo(ch: &MixedChannel, v: &Matrix, samples: usize, seed: u64) -> Result<LossReport> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    let values = state_losses(ch, v, seed, 0, samples)?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(LossReport {
        value: clamp_loss(mean)?,
        stderr: (var / n).sqrt(),
        method: LossKind::MonteCarlo,
        samples,
        seed,
    })
}

/// Leading error coefficient together with its extrapolation diagnostics.
#[derive(Clone, Debug)]
pub struct ErrorCoefficient {
    pub matrix: Matrix,
    /// `‖R₂ − R₁‖_F / ‖R₂‖_F` between the last two Richardson levels.
    pub relative_error: f64,
    pub t0: f64,
}

/// Relative extrapolation error accepted by [`leading_error_coefficient`].
pub const EXTRAPOLATION_TOL: f64 = 0.01;

/// `E^{(q)} = lim i(U(t) − V(t))/t^q`, by two levels of Richardson
/// extrapolation over `t₀, t₀/2, t₀/4`.
///
/// `t0` defaults to `0.1/‖H‖_F`; larger values are rejected. Fails with
/// [`Error::ExtrapolationInaccurate`] when the last two levels differ by
/// more than 1%.
pub fn leading_error_coefficient(
    c: &Circuit,
    spec: &HamiltonianSpec,
    q: usize,
    t0: Option<f64>,
) -> Result<ErrorCoefficient> {
    if q != c.error_order() {
        return Err(Error::param(
            "q",
            alloc::format!("order-{} formulas have leading error order {}", c.order(), c.error_order()),
        ));
    }
    let mut comp = Compiler::new(spec)?;
    let hnorm = spec.dense()?.frobenius_norm();
    let limit = if hnorm > 0.0 { 0.1 / hnorm } else { 1.0 };
    let t0 = t0.unwrap_or(limit);
    if !(t0 > 0.0) || t0 > limit * (1.0 + 1e-12) {
        return Err(Error::param("t0", alloc::format!("need 0 < t0 <= {limit:.6e}")));
    }
    let mut f = |t: f64| -> Result<Matrix> {
        let diff = &comp.compile(c, t)? - &comp.exact(t)?;
        Ok(diff.scale(I * (1.0 / t.powi(q as i32))))
    };
    let f0 = f(t0)?;
    let f1 = f(t0 / 2.0)?;
    let f2 = f(t0 / 4.0)?;
    let r1a = &f1.scale_real(2.0) - &f0;
    let r1b = &f2.scale_real(2.0) - &f1;
    let r2 = (&r1b.scale_real(4.0) - &r1a).scale_real(1.0 / 3.0);
    let norm = r2.frobenius_norm();
    let change = (&r2 - &r1b).frobenius_norm();
    let relative_error = if norm > 0.0 {
        change / norm
    } else if change == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    // A vanishing coefficient (commuting groups) is reported as zero.
    let scale = f0.frobenius_norm().max(1e-300);
    if norm <= 1e-9 * scale.max(1.0) && change <= 1e-9 * scale.max(1.0) {
        return Ok(ErrorCoefficient {
            matrix: r2,
            relative_error: 0.0,
            t0,
        });
    }
    if relative_error > EXTRAPOLATION_TOL {
        return Err(Error::ExtrapolationInaccurate {
            relative: relative_error,
            threshold: EXTRAPOLATION_TOL,
        });
    }
    Ok(ErrorCoefficient {
        matrix: r2,
        relative_error,
        t0,
    })
}

/// Exact Taylor coefficients of `U(t) − V(t)` up to order `q_max`: the
/// circuit is multiplied out as a product of truncated power series of its
/// stage exponentials. Entry `j` is the coefficient of `t^j`.
pub fn error_series(c: &Circuit, spec: &HamiltonianSpec, q_max: usize) -> Result<Vec<Matrix>> {
    let groups = spec.groups_dense()?;
    let d = spec.dim();
    let mut prod: Vec<Matrix> = (0..=q_max)
        .map(|j| if j == 0 { Matrix::identity(d) } else { Matrix::zeros(d, d) })
        .collect();
    for s in c.stages() {
        let gen = groups[s.group].scale(C64::new(0.0, -s.fraction));
        let series = exp_series(&gen, q_max);
        let mut next: Vec<Matrix> = (0..=q_max).map(|_| Matrix::zeros(d, d)).collect();
        for (a, pa) in prod.iter().enumerate() {
            if pa.max_abs() == 0.0 {
                continue;
            }
            for (b, sb) in series.iter().enumerate().take(q_max + 1 - a) {
                next[a + b] += &pa.matmul(sb);
            }
        }
        prod = next;
    }
    let h = spec.dense()?.scale(C64::new(0.0, -1.0));
    let exact = exp_series(&h, q_max);
    Ok(prod.iter().zip(&exact).map(|(p, e)| p - e).collect())
}

/// `X^j / j!` for `j = 0..=order`.
fn exp_series(x: &Matrix, order: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(Matrix::identity(x.rows()));
    for j in 1..=order {
        let next = out[j - 1].matmul(x).scale_real(1.0 / j as f64);
        out.push(next);
    }
    out
}

/// `E^{(q)} = i × [t^q](U − V)` from the exact series. Lower orders are
/// required to vanish to `1e-9` relative to the group norms.
pub fn series_error_coefficient(c: &Circuit, spec: &HamiltonianSpec, q: usize) -> Result<Matrix> {
    let series = error_series(c, spec, q)?;
    let scale = spec.dense()?.frobenius_norm().max(1.0);
    for (j, m) in series.iter().enumerate().take(q) {
        let r = m.frobenius_norm() / scale.powi(j as i32);
        if r > 1e-9 {
            return Err(Error::param(
                "q",
                alloc::format!("order-{j} error term is nonzero ({r:.3e}); q is not the leading order"),
            ));
        }
    }
    Ok(series[q].scale(I))
}

fn two_groups(spec: &HamiltonianSpec, ordering: &[usize]) -> Result<(Matrix, Matrix)> {
    if spec.num_groups() != 2 {
        return Err(Error::param("spec", alloc::format!("needs 2 groups, has {}", spec.num_groups())));
    }
    if ordering.len() != 2 || ordering[0] == ordering[1] || ordering.iter().any(|&g| g > 1) {
        return Err(Error::InvalidOrdering(ordering.to_vec()));
    }
    Ok((spec.group_dense(ordering[0])?, spec.group_dense(ordering[1])?))
}

/// Third-order error of `p·S₂^{(A,B)} + (1−p)·S₂^{(B,A)}`:
/// `(1/24)[(2−3p)A + (1−3p)B, [A, B]]`, with `A` the first group of
/// `ordering`.
///
/// At `p = 1` this is `(1/12)[B,[B,A]] − (1/24)[A,[A,B]]`. With the stage
/// convention used here, `i(S₂(t) − V(t))/t³` tends to the negative of this
/// matrix (see the tests).
pub fn analytic_third_order(spec: &HamiltonianSpec, ordering: &[usize], p: f64) -> Result<Matrix> {
    let (a, b) = two_groups(spec, ordering)?;
    let ab = a.commutator(&b);
    let mut left = a.scale_real(2.0 - 3.0 * p);
    left.axpy(C64::new(1.0 - 3.0 * p, 0.0), &b);
    Ok(left.commutator(&ab).scale_real(1.0 / 24.0))
}

/// Third-order error of one second-order formula for any number of
/// groups: `(1/24) Σ_{γ₁} [H_{γ₁} + 2R_{γ₁}, [R_{γ₁}, H_{γ₁}]]` with
/// `R_{γ₁} = Σ_{γ > γ₁} H_γ` taken along `ordering`. Same sign convention
/// as [`analytic_third_order`].
pub fn second_order_error_commutators(groups: &[Matrix], ordering: &[usize]) -> Result<Matrix> {
    if ordering.len() != groups.len() {
        return Err(Error::InvalidOrdering(ordering.to_vec()));
    }
    let d = groups[0].rows();
    let mut out = Matrix::zeros(d, d);
    for (pos, &g1) in ordering.iter().enumerate() {
        let mut rest = Matrix::zeros(d, d);
        for &g in &ordering[pos + 1..] {
            rest += &groups[g];
        }
        if rest.max_abs() == 0.0 {
            continue;
        }
        let mut left = groups[g1].clone();
        left.axpy(C64::new(2.0, 0.0), &rest);
        out += &left.commutator(&rest.commutator(&groups[g1]));
    }
    Ok(out.scale_real(1.0 / 24.0))
}

/// Weighted third-order error `Σ p_m E_m^{(3)}` over second-order formulas.
pub fn averaged_third_order(spec: &HamiltonianSpec, orderings: &[Vec<usize>], weights: &[f64]) -> Result<Matrix> {
    if orderings.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: orderings.len(),
            found: weights.len(),
        });
    }
    let groups = spec.groups_dense()?;
    let d = spec.dim();
    let mut out = Matrix::zeros(d, d);
    for (o, &w) in orderings.iter().zip(weights) {
        out.axpy(C64::new(w, 0.0), &second_order_error_commutators(&groups, o)?);
    }
    Ok(out)
}

/// Optimal mixing weight for two second-order formulas and the model
/// error `(2−3p)² J_A² + (1−3p)² J_B²` (trace factor dropped).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalWeight {
    pub p_opt: f64,
    pub ja_sqr: f64,
    pub jb_sqr: f64,
    /// `J_A² J_B² / (J_A² + J_B²)`.
    pub model_at_opt: f64,
    /// Model value at `p = 1` (the first formula alone).
    pub model_at_one: f64,
    /// Model value at `p = 0` (the second formula alone).
    pub model_at_zero: f64,
}

impl OptimalWeight {
    pub fn model(&self, p: f64) -> f64 {
        (2.0 - 3.0 * p).powi(2) * self.ja_sqr + (1.0 - 3.0 * p).powi(2) * self.jb_sqr
    }

    /// Optimum relative to the better endpoint.
    pub fn ratio_to_best_endpoint(&self) -> f64 {
        self.model_at_opt / self.model_at_one.min(self.model_at_zero)
    }
}

/// `p_opt = (2J_A² + J_B²) / (3(J_A² + J_B²))` for a two-group spec.
pub fn optimal_weight_two_term(spec: &HamiltonianSpec) -> Result<OptimalWeight> {
    if spec.num_groups() != 2 {
        return Err(Error::param("spec", alloc::format!("needs 2 groups, has {}", spec.num_groups())));
    }
    let w = group_weight_squares(spec)?;
    let (a, b) = (w[0], w[1]);
    if !(a + b > 0.0) {
        return Err(Error::param("spec", "total coefficient weight is zero"));
    }
    let mut out = OptimalWeight {
        p_opt: (2.0 * a + b) / (3.0 * (a + b)),
        ja_sqr: a,
        jb_sqr: b,
        model_at_opt: a * b / (a + b),
        model_at_one: 0.0,
        model_at_zero: 0.0,
    };
    out.model_at_one = out.model(1.0);
    out.model_at_zero = out.model(0.0);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GridPoint {
    pub weights: Vec<f64>,
    pub report: LossReport,
}

#[derive(Clone, Debug)]
pub struct GridSearch {
    pub best: GridPoint,
    pub scan: Vec<GridPoint>,
}

/// Relative loss difference below which two grid points tie.
pub const TIE_TOL: f64 = 1e-12;

/// Exhaustive scan of `p_m ∈ {0, 1/r, …, 1}` projected onto the simplex.
///
/// Grid points are visited in lexicographic order of their integer labels
/// (first weight most significant); the all-zero point is skipped and each
/// other point is divided by its sum. Ties (within [`TIE_TOL`] relative)
/// keep the first point.
pub fn grid_search_weights(
    unitaries: &[Matrix],
    v: &Matrix,
    resolution: usize,
    method: LossMethod,
) -> Result<GridSearch> {
    let mut scan = Vec::new();
    let best = grid_search_with(unitaries, v, resolution, method, |p| scan.push(p.clone()))?;
    Ok(GridSearch { best, scan })
}

/// As [`grid_search_weights`] but streams every point to `visit`.
pub fn grid_search_with(
    unitaries: &[Matrix],
    v: &Matrix,
    resolution: usize,
    method: LossMethod,
    mut visit: impl FnMut(&GridPoint),
) -> Result<GridPoint> {
    let m = unitaries.len();
    if m == 0 {
        return Err(Error::param("unitaries", "need at least one circuit"));
    }
    if resolution == 0 {
        return Err(Error::param("resolution", "need at least one bin"));
    }
    let base = resolution + 1;
    let mut count: usize = 1;
    for _ in 0..m {
        count = count.saturating_mul(base);
    }
    if count > GRID_CAP {
        return Err(Error::CapExceeded { count, cap: GRID_CAP });
    }
    let form = LossQuadratic::new(unitaries, v, method)?;
    let mut label = vec![0usize; m];
    let mut best: Option<GridPoint> = None;
    let mut weights = vec![0.0; m];
    for _ in 0..count {
        let total: usize = label.iter().sum();
        if total > 0 {
            for (w, &k) in weights.iter_mut().zip(&label) {
                *w = k as f64 / total as f64;
            }
            let point = GridPoint {
                weights: weights.clone(),
                report: form.eval(&weights)?,
            };
            visit(&point);
            let better = |b: &GridPoint| {
                point.report.value < b.report.value - TIE_TOL * b.report.value.abs()
            };
            if best.as_ref().is_none_or(better) {
                best = Some(point);
            }
        }
        // Increment the label, last digit fastest.
        for digit in label.iter_mut().rev() {
            *digit += 1;
            if *digit < base {
                break;
            }
            *digit = 0;
        }
    }
    Ok(best.expect("grid has a nonzero point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::make_formula;
    use crate::linalg::{evolve_unitary, haar_state};
    use crate::pauli::build_model;
    use alloc::collections::BTreeMap;
    use alloc::string::{String, ToString};

    fn xy(n: usize, h: f64) -> HamiltonianSpec {
        let p: BTreeMap<String, f64> = [("n".to_string(), n as f64), ("h".to_string(), h)].into();
        build_model("xy_chain", &p).unwrap()
    }

    fn random_unitary(d: usize, seed: u64) -> Matrix {
        let cols: Vec<Vec<C64>> = (0..d).map(|j| haar_state(d, seed * 1000 + j as u64).unwrap()).collect();
        let mut q: Vec<Vec<C64>> = Vec::new();
        for c in cols {
            let mut v = c;
            for u in &q {
                let proj = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
            let n = norm_sqr(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            q.push(v);
        }
        Matrix::from_fn(d, d, |i, j| q[j][i])
    }

    #[test]
    fn identity_channel_has_zero_loss() {
        let v = random_unitary(4, 1);
        let ch = MixedChannel::new(vec![v.clone()], vec![1.0]).unwrap();
        assert!(loss_analytic(&ch, &v).unwrap().value.abs() < 1e-12);
        assert!(loss_monte_carlo(&ch, &v, 10, 3).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn traceless_overlap_case() {
        // Tr(Z† I) = 0 on one qubit: L = 2(1 − 1/(d+1)).
        let z = Matrix::diag_real(&[1.0, -1.0]);
        let ch = MixedChannel::new(vec![z], vec![1.0]).unwrap();
        let l = loss_analytic(&ch, &Matrix::identity(2)).unwrap().value;
        assert!((l - 2.0 * (1.0 - 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn explicit_projector_difference_matches_form() {
        let u1 = random_unitary(4, 2);
        let u2 = random_unitary(4, 3);
        let v = random_unitary(4, 4);
        let ch = MixedChannel::new(vec![u1, u2], vec![0.3, 0.7]).unwrap();
        for seed in 0..5 {
            let psi = haar_state(4, 50 + seed).unwrap();
            let rho = Matrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
            let direct = (&ch.apply(&rho) - &rho.conjugate_by(&v.adjoint())).frobenius_norm_sqr();
            let form = state_loss(&ch, &v, &psi).unwrap();
            assert!((direct - form).abs() < 1e-12, "{direct} {form}");
        }
    }

    #[test]
    fn analytic_matches_monte_carlo() {
        let u1 = random_unitary(4, 5);
        let u2 = random_unitary(4, 6);
        let v = random_unitary(4, 7);
        let ch = MixedChannel::new(vec![u1, u2], vec![0.5, 0.5]).unwrap();
        let exact = loss_analytic(&ch, &v).unwrap().value;
        let mc = loss_monte_carlo(&ch, &v, 20_000, 11).unwrap();
        assert!((exact - mc.value).abs() < 3.0 * mc.stderr, "{exact} {mc:?}");
        // The quadratic-form estimator reproduces the direct sample mean.
        let form = LossQuadratic::monte_carlo(ch.unitaries(), &v, 20_000, 11).unwrap();
        let r = form.eval(ch.weights()).unwrap();
        assert!((r.value - mc.value).abs() < 1e-12);
        assert!((r.stderr - mc.stderr).abs() < 1e-6 * mc.stderr);
    }

    #[test]
    fn invariant_under_common_left_rotation() {
        let u1 = random_unitary(4, 8);
        let u2 = random_unitary(4, 9);
        let v = random_unitary(4, 10);
        let w = random_unitary(4, 12);
        let ch = MixedChannel::new(vec![u1.clone(), u2.clone()], vec![0.2, 0.8]).unwrap();
        let rot = MixedChannel::new(vec![w.matmul(&u1), w.matmul(&u2)], vec![0.2, 0.8]).unwrap();
        let a = loss_analytic(&ch, &v).unwrap().value;
        let b = loss_analytic(&rot, &w.matmul(&v)).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn weights_are_validated() {
        let v = Matrix::identity(2);
        assert!(matches!(
            MixedChannel::new(vec![v.clone(), v.clone()], vec![0.5, 0.6]),
            Err(Error::InvalidWeights { .. })
        ));
        assert!(MixedChannel::new(vec![v.clone()], vec![-0.0]).is_err());
        assert!(MixedChannel::new(vec![v.scale_real(2.0)], vec![1.0]).is_err());
    }

    #[test]
    fn first_order_coefficient_is_half_commutator() {
        let spec = xy(3, 1.0);
        let c = make_formula(1, &[0, 1]).unwrap();
        let e = leading_error_coefficient(&c, &spec, 2, None).unwrap();
        let a = spec.group_dense(0).unwrap();
        let b = spec.group_dense(1).unwrap();
        // e^{-iAt}e^{-iBt} − e^{-i(A+B)t} = −(t²/2)[A,B] + O(t³).
        let expect = a.commutator(&b).scale(C64::new(0.0, -0.5));
        let rel = (&e.matrix - &expect).frobenius_norm() / expect.frobenius_norm();
        assert!(rel < 0.02, "{rel}");
        let exact = series_error_coefficient(&c, &spec, 2).unwrap();
        assert!((&exact - &expect).frobenius_norm() < 1e-10 * expect.frobenius_norm());
    }

    #[test]
    fn commuting_groups_have_no_error() {
        let p: BTreeMap<String, f64> =
            [("n".to_string(), 3.0), ("mu".to_string(), 0.5), ("lambda".to_string(), 0.0)].into();
        let spec = build_model("ising_tl", &p).unwrap();
        let c = make_formula(1, &[0, 1]).unwrap();
        let e = leading_error_coefficient(&c, &spec, 2, None).unwrap();
        assert!(e.matrix.frobenius_norm() < 1e-8);
    }

    #[test]
    fn second_order_extraction_is_minus_closed_form() {
        let spec = xy(4, 1.0);
        for (ordering, p) in [([0, 1], 1.0), ([1, 0], 0.0)] {
            let c = make_formula(2, &ordering).unwrap();
            let e = leading_error_coefficient(&c, &spec, 3, None).unwrap();
            let closed = analytic_third_order(&spec, &[0, 1], p).unwrap();
            let rel = (&e.matrix + &closed).frobenius_norm() / closed.frobenius_norm();
            assert!(rel < 0.02, "{rel}");
            let series = series_error_coefficient(&c, &spec, 3).unwrap();
            assert!((&series + &closed).frobenius_norm() < 1e-10 * closed.frobenius_norm());
        }
    }

    #[test]
    fn general_gamma_commutators_reduce_to_two_groups() {
        let spec = xy(4, 0.5);
        let groups = spec.groups_dense().unwrap();
        let g = second_order_error_commutators(&groups, &[0, 1]).unwrap();
        let d1 = analytic_third_order(&spec, &[0, 1], 1.0).unwrap();
        assert!((&g - &d1).frobenius_norm() < 1e-12 * d1.frobenius_norm());
        let p: BTreeMap<String, f64> = [("n".to_string(), 3.0), ("alpha".to_string(), 1.0)].into();
        let heis = build_model("powerlaw_heisenberg", &p).unwrap();
        let hg = heis.groups_dense().unwrap();
        for o in [[0, 1, 2], [2, 0, 1]] {
            let c = make_formula(2, &o).unwrap();
            let series = series_error_coefficient(&c, &heis, 3).unwrap();
            let closed = second_order_error_commutators(&hg, &o).unwrap();
            assert!((&series + &closed).frobenius_norm() < 1e-10 * closed.frobenius_norm());
        }
    }

    #[test]
    fn closed_form_special_weights() {
        let spec = xy(3, 1.0);
        let a = spec.group_dense(0).unwrap();
        let b = spec.group_dense(1).unwrap();
        let third = analytic_third_order(&spec, &[0, 1], 1.0 / 3.0).unwrap();
        let expect = a.commutator(&a.commutator(&b)).scale_real(1.0 / 24.0);
        assert!((&third - &expect).frobenius_norm() < 1e-12);
        let comm = build_model("ising_tl", &[("n".to_string(), 3.0), ("mu".to_string(), 1.0), ("lambda".to_string(), 0.0)].into()).unwrap();
        assert!(analytic_third_order(&comm, &[0, 1], 0.4).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn optimal_weight_examples() {
        let w = optimal_weight_two_term(&xy(6, 1.0)).unwrap();
        assert_eq!(w.p_opt, 27.0 / 48.0);
        assert!((w.model_at_opt - 55.0 / 16.0).abs() < 1e-15);
        assert_eq!(w.model_at_one, 31.0);
        assert_eq!(w.model_at_zero, 49.0);
        let w = optimal_weight_two_term(&xy(4, 0.0)).unwrap();
        assert!((w.p_opt - 0.5).abs() < 1e-15);
        let p: BTreeMap<String, f64> =
            [("n".to_string(), 3.0), ("mu".to_string(), 1.0), ("lambda".to_string(), 0.0)].into();
        let only_a = build_model("ising_tl", &p).unwrap();
        assert!((optimal_weight_two_term(&only_a).unwrap().p_opt - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_search_basics() {
        let spec = xy(3, 1.0);
        let v = evolve_unitary(&spec.dense().unwrap(), 0.1).unwrap();
        let u = crate::formulas::compile_unitary(&make_formula(2, &[0, 1]).unwrap(), &spec, 0.1).unwrap();
        let single = grid_search_weights(core::slice::from_ref(&u), &v, 10, LossMethod::Analytic).unwrap();
        assert_eq!(single.scan.len(), 10);
        assert_eq!(single.best.weights, vec![1.0]);
        let tie = grid_search_weights(&[u.clone(), u], &v, 10, LossMethod::Analytic).unwrap();
        assert_eq!(tie.best.weights, vec![0.0, 1.0]);
        assert!(tie.scan.iter().all(|p| (p.report.value - tie.best.report.value).abs() < 1e-15));
    }
}
