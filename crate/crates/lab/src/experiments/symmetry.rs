//! Mixtures of a circuit with its symmetry-conjugated copies.

use nusc_core::channels::{series_error_coefficient, LossQuadratic};
use nusc_core::formulas::{all_orderings, make_formula, Compiler};
use nusc_core::symmetry::{
    conjugated_formulas, hadamard_generator, make_symmetry_set, suppression_scan, SymmetryKind,
    DEFAULT_DELTA,
};
use nusc_core::Matrix;

use super::{loss, par_map, powerlaw, require_nonempty, require_positive, uniform, unit_grid, Outcome};
use crate::config::{SymmetryMScan, SymmetryPScan, SymmetrySizeScan, SymmetrySteps};
use crate::error::{LabError, LabResult};
use crate::table::Table;

/// Largest system in the size scan.
pub const SIZE_SCAN_CAP: usize = 8;

fn check_steps(dt: f64, steps: &[u64]) -> LabResult<()> {
    require_positive("dt", dt)?;
    require_nonempty("steps", steps)?;
    if steps.contains(&0) {
        return Err(LabError::config("steps", "need at least one step"));
    }
    Ok(())
}

pub fn p_scan(c: &SymmetryPScan) -> LabResult<Outcome> {
    require_nonempty("alphas", &c.alphas)?;
    check_steps(c.dt, &[c.steps])?;
    let grid = unit_grid(c.points)?;
    let t = c.dt * c.steps as f64;
    let rows = par_map(&c.alphas, |&alpha| {
        let spec = powerlaw(c.n, alpha)?;
        let h = spec.dense()?;
        let mut comp = Compiler::new(&spec)?;
        let v = comp.exact(t)?;
        let u = comp.compile_steps(&make_formula(c.k, &c.ordering)?, c.dt, c.steps)?;
        let set = make_symmetry_set(c.symmetry, &h, 2, c.seed, DEFAULT_DELTA)?;
        let form = LossQuadratic::analytic(&conjugated_formulas(&u, &set)?, &v)?;
        let single = form.eval(&[1.0, 0.0])?.value;
        grid.iter()
            .map(|&p| {
                let l = form.eval(&[p, 1.0 - p])?.value;
                Ok(vec![
                    alpha.into(),
                    p.into(),
                    l.into(),
                    single.into(),
                    (l / single).into(),
                    c.seed.into(),
                ])
            })
            .collect::<LabResult<Vec<_>>>()
    })?;
    let mut table = Table::new("", &["alpha", "p", "loss", "loss_single", "ratio", "seed"]);
    for r in rows.into_iter().flatten() {
        table.push(r);
    }
    Ok(Outcome {
        tables: vec![table],
        notes: vec![format!(
            "p is the weight of the bare circuit; symmetry = {}; t = {t}",
            c.symmetry.as_str()
        )],
    })
}

pub fn steps(c: &SymmetrySteps) -> LabResult<Outcome> {
    require_nonempty("alphas", &c.alphas)?;
    check_steps(c.dt, &c.steps)?;
    if !(0.0..=1.0).contains(&c.p) {
        return Err(LabError::config("p", "must lie in [0, 1]"));
    }
    let rows = par_map(&c.alphas, |&alpha| {
        let spec = powerlaw(c.n, alpha)?;
        let h = spec.dense()?;
        let mut comp = Compiler::new(&spec)?;
        let step = comp.compile(&make_formula(c.k, &c.ordering)?, c.dt)?;
        let set = make_symmetry_set(c.symmetry, &h, 2, c.seed, DEFAULT_DELTA)?;
        let mut out = Vec::new();
        for &n in &c.steps {
            let t = c.dt * n as f64;
            let v = comp.exact(t)?;
            let form = LossQuadratic::analytic(&conjugated_formulas(&step.pow(n), &set)?, &v)?;
            let single = form.eval(&[1.0, 0.0])?.value;
            let mixed = form.eval(&[c.p, 1.0 - c.p])?.value;
            out.push(vec![
                alpha.into(),
                n.into(),
                t.into(),
                single.into(),
                mixed.into(),
                (mixed / single).into(),
                c.seed.into(),
            ]);
        }
        Ok(out)
    })?;
    let mut table = Table::new(
        "",
        &["alpha", "steps", "t", "loss_single", "loss_symmetric", "ratio", "seed"],
    );
    for r in rows.into_iter().flatten() {
        table.push(r);
    }
    Ok(Outcome {
        tables: vec![table],
        notes: vec![format!("symmetry = {}; p = {}", c.symmetry.as_str(), c.p)],
    })
}

pub fn size_scan(c: &SymmetrySizeScan) -> LabResult<Outcome> {
    require_nonempty("sizes", &c.sizes)?;
    require_nonempty("alphas", &c.alphas)?;
    check_steps(c.dt, &[c.steps])?;
    if let Some(&n) = c.sizes.iter().find(|&&n| n > SIZE_SCAN_CAP) {
        return Err(LabError::config("sizes", format!("{n} exceeds the size-scan cap of {SIZE_SCAN_CAP}")));
    }
    let t = c.dt * c.steps as f64;
    let cases: Vec<(usize, f64)> = c.sizes.iter().flat_map(|&n| c.alphas.iter().map(move |&a| (n, a))).collect();
    let rows = par_map(&cases, |&(n, alpha)| {
        let spec = powerlaw(n, alpha)?;
        let h = spec.dense()?;
        let mut comp = Compiler::new(&spec)?;
        let v = comp.exact(t)?;
        let u = comp.compile_steps(&make_formula(c.k, &c.ordering)?, c.dt, c.steps)?;
        let set = make_symmetry_set(c.symmetry, &h, c.m, c.seed, DEFAULT_DELTA)?;
        let us = conjugated_formulas(&u, &set)?;
        let single = loss(&us[..1], &[1.0], &v)?;
        let mixed = loss(&us, &uniform(us.len()), &v)?;
        Ok(vec![
            n.into(),
            alpha.into(),
            set.len().into(),
            single.into(),
            mixed.into(),
            (mixed / single).into(),
            c.seed.into(),
        ])
    })?;
    let mut table = Table::new("", &["n", "alpha", "M", "loss_single", "loss_symmetric", "ratio", "seed"]);
    for r in rows {
        table.push(r);
    }
    Ok(Outcome {
        tables: vec![table],
        notes: vec![format!("symmetry = {}; t = {t}", c.symmetry.as_str())],
    })
}

pub fn m_scan(c: &SymmetryMScan) -> LabResult<Outcome> {
    require_nonempty("alphas", &c.alphas)?;
    require_nonempty("m_list", &c.m_list)?;
    check_steps(c.dt, &[c.steps])?;
    let t = c.dt * c.steps as f64;
    let rows = par_map(&c.alphas, |&alpha| {
        let spec = powerlaw(c.n, alpha)?;
        let h = spec.dense()?;
        let mut comp = Compiler::new(&spec)?;
        let v = comp.exact(t)?;
        let mut us: Vec<Matrix> = Vec::new();
        for o in all_orderings(spec.num_groups())? {
            us.push(comp.compile_steps(&make_formula(c.k, &o)?, c.dt, c.steps)?);
        }
        let single = loss(&us[..1], &[1.0], &v)?;
        let ordering_ratio = loss(&us, &uniform(us.len()), &v)? / single;

        let base: Vec<usize> = (0..spec.num_groups()).collect();
        let circuit = make_formula(c.generator_order, &base)?;
        let e1 = series_error_coefficient(&circuit, &spec, circuit.error_order())?;
        let scan = suppression_scan(&e1, &hadamard_generator(c.n), c.delta, &c.m_list)?;

        let mut out = Vec::new();
        for point in &scan.points {
            let set = make_symmetry_set(SymmetryKind::HaarGlobal, &h, point.m, c.seed, c.delta)?;
            let conj = conjugated_formulas(&us[0], &set)?;
            let ratio = loss(&conj, &uniform(conj.len()), &v)? / single;
            out.push(vec![
                alpha.into(),
                point.m.into(),
                point.noncommuting.into(),
                point.commuting.into(),
                ratio.into(),
                ordering_ratio.into(),
                c.seed.into(),
            ]);
        }
        let slope = scan.fit.map_or(f64::NAN, |f| f.slope);
        Ok((out, vec![alpha.into(), slope.into(), c.seed.into()]))
    })?;
    let mut table = Table::new(
        "",
        &[
            "alpha",
            "M",
            "residual_noncommuting",
            "residual_commuting",
            "loss_reduction_ratio",
            "ordering_mixture_ratio",
            "seed",
        ],
    );
    let mut fits = Table::new("fit", &["alpha", "suppression_slope", "seed"]);
    for (r, f) in rows {
        for row in r {
            table.push(row);
        }
        fits.push(f);
    }
    Ok(Outcome {
        tables: vec![table, fits],
        notes: vec![
            format!(
                "residuals: order-{} error averaged over exp(i m O delta), O = sum of Hadamard generators, delta = {}",
                c.generator_order, c.delta
            ),
            format!("loss ratios: order-{} formula, dt = {}, t = {t}, M - 1 Haar global rotations plus identity", c.k, c.dt),
        ],
    })
}
