//! Sampled-ordering fluctuations against the matrix Bernstein bound.

use nusc_core::fit;
use nusc_core::sampling::{bernstein_epsilon, bernstein_gamma, FluctuationSetup};

use super::{item_seed, par_map, require_nonempty, require_positive, Outcome};
use crate::config::BernsteinTrials;
use crate::error::{LabError, LabResult};
use crate::table::Table;

pub fn trials(c: &BernsteinTrials) -> LabResult<Outcome> {
    let spec = c.model.build()?;
    require_nonempty("samples", &c.samples)?;
    require_positive("t", c.t)?;
    if c.trials < 1 {
        return Err(LabError::config("trials", "need at least one trial"));
    }
    if !(c.delta > 0.0 && c.delta < 1.0) {
        return Err(LabError::config("delta", "must lie in (0, 1)"));
    }
    let setup = FluctuationSetup::new(&spec, c.k, c.steps, c.t)?;
    let gamma = bernstein_gamma(&spec, c.k)?;
    let q = setup.q();
    let mut table = Table::new(
        "",
        &["T", "N", "t", "q", "gamma", "delta", "observed_norm", "bound_epsilon", "violated", "seed"],
    );
    let mut summary = Table::new("summary", &["T", "trials", "violations", "violation_rate", "median_norm", "bound_epsilon"]);
    let mut medians = Vec::new();
    for (ti, &samples) in c.samples.iter().enumerate() {
        let eps = bernstein_epsilon(samples, c.steps, c.t, q, gamma, spec.n(), c.delta)?;
        let idx: Vec<u64> = (0..c.trials as u64).map(|i| (ti * c.trials) as u64 + i).collect();
        let results = par_map(&idx, |&i| Ok(setup.trial(samples, item_seed(c.seed, i), eps)?))?;
        let mut norms = Vec::with_capacity(results.len());
        let mut violations = 0usize;
        for r in &results {
            let violated = r.observed_norm > eps;
            violations += violated as usize;
            norms.push(r.observed_norm);
            table.push(vec![
                samples.into(),
                c.steps.into(),
                c.t.into(),
                q.into(),
                gamma.into(),
                c.delta.into(),
                r.observed_norm.into(),
                eps.into(),
                violated.into(),
                r.seed.into(),
            ]);
        }
        norms.sort_by(f64::total_cmp);
        let mid = norms.len() / 2;
        let median = if norms.len() % 2 == 1 { norms[mid] } else { 0.5 * (norms[mid - 1] + norms[mid]) };
        medians.push(median);
        summary.push(vec![
            samples.into(),
            c.trials.into(),
            violations.into(),
            (violations as f64 / c.trials as f64).into(),
            median.into(),
            eps.into(),
        ]);
    }
    let mut notes = vec![format!("trial seeds are drawn from stream (sample index * trials + trial) of seed {}", c.seed)];
    if c.samples.len() >= 2 {
        let x: Vec<f64> = c.samples.iter().map(|&s| s as f64).collect();
        let f = fit::log_log(&x, &medians)?;
        notes.push(format!("median observed_norm vs T: log-log slope {} (r^2 {})", f.slope, f.r_squared));
    }
    Ok(Outcome {
        tables: vec![table, summary],
        notes,
    })
}
