//! Mixtures of product formulas with different term orderings.

use nusc_core::channels::{
    loss_analytic, optimal_weight_two_term, state_losses, LossMethod, LossQuadratic, MixedChannel,
};
use nusc_core::formulas::{all_orderings, make_formula, Compiler};
use nusc_core::Matrix;

use super::{loss, par_map, powerlaw, require_nonempty, require_positive, uniform, unit_grid, Outcome};
use crate::config::{DeviationVsSamples, LongtimeAlphaScan, LossMethodKind, LossVsP, LossVsSteps};
use crate::error::{LabError, LabResult};
use crate::table::Table;

const AB: [usize; 2] = [0, 1];
const BA: [usize; 2] = [1, 0];

fn two_group(spec: &nusc_core::pauli::HamiltonianSpec) -> LabResult<()> {
    if spec.num_groups() != 2 {
        return Err(LabError::config("model", "needs a two-group model"));
    }
    Ok(())
}

pub fn loss_vs_p(c: &LossVsP) -> LabResult<Outcome> {
    let spec = c.model.build()?;
    two_group(&spec)?;
    require_positive("t", c.t)?;
    require_nonempty("orders", &c.orders)?;
    let grid = unit_grid(c.points)?;
    let opt = optimal_weight_two_term(&spec)?;
    let method = match c.loss_method {
        LossMethodKind::Analytic => LossMethod::Analytic,
        LossMethodKind::MonteCarlo => LossMethod::MonteCarlo {
            samples: c.samples,
            seed: c.seed,
        },
    };
    let mut comp = Compiler::new(&spec)?;
    let v = comp.exact(c.t)?;
    let mut forms = Vec::new();
    for &k in &c.orders {
        let u1 = comp.compile(&make_formula(k, &AB)?, c.t)?;
        let u2 = comp.compile(&make_formula(k, &BA)?, c.t)?;
        forms.push((k, [u1, u2]));
    }
    let forms = par_map(&forms, |(k, us)| Ok((*k, LossQuadratic::new(us, &v, method)?)))?;

    let mut scan = Table::new("", &["k", "p", "loss", "loss_ratio", "stderr", "method", "seed"]);
    let mut minima = Table::new(
        "minima",
        &["k", "p_min", "loss_min", "loss_p0", "loss_p1", "p_opt", "loss_p_opt", "seed"],
    );
    for (k, form) in &forms {
        let at = |p: f64| form.eval(&[p, 1.0 - p]);
        let l1 = at(1.0)?.value;
        for &p in &grid {
            let r = at(p)?;
            scan.push(vec![
                (*k).into(),
                p.into(),
                r.value.into(),
                (r.value / l1).into(),
                r.stderr.into(),
                r.method.as_str().into(),
                c.seed.into(),
            ]);
        }
        // The loss is quadratic in p: fit through p = 0, ½, 1.
        let (f0, fh) = (at(0.0)?.value, at(0.5)?.value);
        let a = 2.0 * f0 - 4.0 * fh + 2.0 * l1;
        let b = -3.0 * f0 + 4.0 * fh - l1;
        let p_min = if a > 0.0 { (-b / (2.0 * a)).clamp(0.0, 1.0) } else if l1 < f0 { 1.0 } else { 0.0 };
        minima.push(vec![
            (*k).into(),
            p_min.into(),
            at(p_min)?.value.into(),
            f0.into(),
            l1.into(),
            opt.p_opt.into(),
            at(opt.p_opt)?.value.into(),
            c.seed.into(),
        ]);
    }
    Ok(Outcome {
        tables: vec![scan, minima],
        notes: vec![
            "p is the weight of the (A,B) ordering; loss_ratio = loss / loss(p = 1)".into(),
            format!("two-term optimal weight p_opt = {}", opt.p_opt),
        ],
    })
}

pub fn deviation_vs_samples(c: &DeviationVsSamples) -> LabResult<Outcome> {
    let spec = c.model.build()?;
    two_group(&spec)?;
    require_positive("t", c.t)?;
    require_nonempty("orders", &c.orders)?;
    require_nonempty("weights", &c.weights)?;
    require_nonempty("sample_counts", &c.sample_counts)?;
    if c.batches < 2 {
        return Err(LabError::config("batches", "need at least two batches"));
    }
    if c.sample_counts.contains(&0) {
        return Err(LabError::config("sample_counts", "need at least one sample per batch"));
    }
    let mut comp = Compiler::new(&spec)?;
    let v = comp.exact(c.t)?;
    let mut cases = Vec::new();
    for &k in &c.orders {
        let us = vec![
            comp.compile(&make_formula(k, &AB)?, c.t)?,
            comp.compile(&make_formula(k, &BA)?, c.t)?,
        ];
        for &p in &c.weights {
            for &n in &c.sample_counts {
                cases.push((k, p, n, us.clone()));
            }
        }
    }
    let rows = par_map(&cases, |(k, p, n, us)| {
        let ch = MixedChannel::new(us.clone(), vec![*p, 1.0 - p])?;
        let exact = loss_analytic(&ch, &v)?.value;
        let mut means = Vec::with_capacity(c.batches);
        for b in 0..c.batches {
            let xs = state_losses(&ch, &v, c.seed, (b * n) as u64, *n)?;
            means.push(xs.iter().sum::<f64>() / *n as f64);
        }
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / means.len() as f64;
        Ok(vec![
            (*k).into(),
            (*p).into(),
            (*n).into(),
            c.batches.into(),
            mean.into(),
            var.sqrt().into(),
            (var.sqrt() / mean).into(),
            exact.into(),
            c.seed.into(),
        ])
    })?;
    let mut t = Table::new(
        "",
        &[
            "k",
            "p",
            "samples",
            "batches",
            "mean_loss",
            "rms_deviation",
            "relative_deviation",
            "analytic_loss",
            "seed",
        ],
    );
    for r in rows {
        t.push(r);
    }
    Ok(Outcome {
        tables: vec![t],
        notes: vec!["batch b of size N uses Haar states b*N .. (b+1)*N of the seed".into()],
    })
}

/// `N`-step evolutions of every ordering of the three power-law groups.
fn ordering_evolutions(comp: &mut Compiler<'_>, k: usize, dt: f64, steps: u64) -> LabResult<Vec<Matrix>> {
    let mut out = Vec::new();
    for o in all_orderings(comp.spec().num_groups())? {
        out.push(comp.compile_steps(&make_formula(k, &o)?, dt, steps)?);
    }
    Ok(out)
}

pub fn longtime_alpha_scan(c: &LongtimeAlphaScan) -> LabResult<Outcome> {
    require_nonempty("sizes", &c.sizes)?;
    require_nonempty("alphas", &c.alphas)?;
    require_positive("t", c.t)?;
    if c.steps < 1 {
        return Err(LabError::config("steps", "need at least one step"));
    }
    let cases: Vec<(usize, f64)> = c.sizes.iter().flat_map(|&n| c.alphas.iter().map(move |&a| (n, a))).collect();
    let dt = c.t / c.steps as f64;
    let rows = par_map(&cases, |&(n, alpha)| {
        let spec = powerlaw(n, alpha)?;
        let mut comp = Compiler::new(&spec)?;
        let v = comp.exact(c.t)?;
        let us = ordering_evolutions(&mut comp, c.k, dt, c.steps)?;
        let singles: Vec<f64> = us.iter().map(|u| loss(std::slice::from_ref(u), &[1.0], &v)).collect::<LabResult<_>>()?;
        let mixture = loss(&us, &uniform(us.len()), &v)?;
        let mean_single = singles.iter().sum::<f64>() / singles.len() as f64;
        Ok(vec![
            n.into(),
            alpha.into(),
            c.k.into(),
            c.steps.into(),
            c.t.into(),
            singles[0].into(),
            mean_single.into(),
            mixture.into(),
            (mixture / singles[0]).into(),
            c.seed.into(),
        ])
    })?;
    let mut t = Table::new(
        "",
        &[
            "n",
            "alpha",
            "k",
            "steps",
            "t",
            "loss_single",
            "loss_single_mean",
            "loss_mixture",
            "ratio",
            "seed",
        ],
    );
    for r in rows {
        t.push(r);
    }
    Ok(Outcome {
        tables: vec![t],
        notes: vec!["loss_single uses ordering (0,1,2); the mixture weights all orderings equally".into()],
    })
}

pub fn loss_vs_steps(c: &LossVsSteps) -> LabResult<Outcome> {
    require_nonempty("steps", &c.steps)?;
    require_positive("dt", c.dt)?;
    if c.steps.contains(&0) {
        return Err(LabError::config("steps", "need at least one step"));
    }
    let spec = powerlaw(c.n, c.alpha)?;
    let mut comp = Compiler::new(&spec)?;
    let step: Vec<Matrix> = all_orderings(spec.num_groups())?
        .iter()
        .map(|o| comp.compile(&make_formula(c.k, o)?, c.dt))
        .collect::<nusc_core::Result<_>>()?;
    let mut cases = Vec::new();
    for &n in &c.steps {
        cases.push((n, comp.exact(c.dt * n as f64)?));
    }
    let rows = par_map(&cases, |(n, v)| {
        let us: Vec<Matrix> = step.iter().map(|s| s.pow(*n)).collect();
        let single = loss(&us[..1], &[1.0], v)?;
        let mixture = loss(&us, &uniform(us.len()), v)?;
        Ok(vec![
            c.n.into(),
            c.alpha.into(),
            c.k.into(),
            c.dt.into(),
            (*n).into(),
            (c.dt * *n as f64).into(),
            single.into(),
            mixture.into(),
            (mixture / single).into(),
            c.seed.into(),
        ])
    })?;
    let mut t = Table::new(
        "",
        &["n", "alpha", "k", "dt", "steps", "t", "loss_single", "loss_mixture", "ratio", "seed"],
    );
    for r in rows {
        t.push(r);
    }
    Ok(Outcome {
        tables: vec![t],
        notes: vec!["loss_single uses ordering (0,1,2); the mixture weights all orderings equally".into()],
    })
}
