//! Shot-sampled total variation distance of one-step first-order formulas.

use nusc_core::shots::{distributions, shots_from, ShotChannel};

use super::{item_seed, par_map, require_nonempty, Outcome};
use crate::config::{ShotMode, ShotsTvd};
use crate::error::{LabError, LabResult};
use crate::table::{Table, Value};

pub fn tvd(c: &ShotsTvd) -> LabResult<Outcome> {
    let spec = c.model.build()?;
    require_nonempty("times", &c.times)?;
    if c.times.iter().any(|t| !t.is_finite()) {
        return Err(LabError::config("times", "must be finite"));
    }
    if c.shots < 1 {
        return Err(LabError::config("shots", "need at least one shot"));
    }
    if c.repetitions < 1 {
        return Err(LabError::config("repetitions", "need at least one repetition"));
    }
    let n = spec.n();
    let reps = match c.mode {
        ShotMode::Exact => 1,
        ShotMode::Shots => c.repetitions,
    };
    let shots = match c.mode {
        ShotMode::Exact => None,
        ShotMode::Shots => Some(c.shots),
    };
    let mode = match c.mode {
        ShotMode::Exact => "exact",
        ShotMode::Shots => "shots",
    };
    let mut tvd = Table::new("", &["t", "channel", "mode", "shots", "repetition", "seed", "tvd"]);
    let mut summary = Table::new(
        "summary",
        &["t", "tvd_exact_ab", "tvd_exact_ba", "tvd_exact_averaged", "repetitions", "averaged_wins", "win_rate"],
    );
    let mut hist = Table::new(
        "histograms",
        &["t", "repetition", "channel", "bitstring", "count", "frequency", "exact_probability"],
    );
    for (ti, &t) in c.times.iter().enumerate() {
        let dist = distributions(&spec, t)?;
        let exact: Vec<f64> = ShotChannel::ALL
            .iter()
            .map(|&ch| Ok(shots_from(&dist, ch, None, 0)?.tvd))
            .collect::<LabResult<_>>()?;
        let idx: Vec<usize> = (0..reps).collect();
        let outcomes = par_map(&idx, |&rep| {
            ShotChannel::ALL
                .iter()
                .enumerate()
                .map(|(ci, &ch)| {
                    let item = ((ti * reps + rep) * ShotChannel::ALL.len() + ci) as u64;
                    let seed = item_seed(c.seed, item);
                    Ok((seed, shots_from(&dist, ch, shots, seed)?))
                })
                .collect::<LabResult<Vec<_>>>()
        })?;
        let mut wins = 0usize;
        for (rep, row) in outcomes.iter().enumerate() {
            let get = |ch: ShotChannel| row.iter().find(|(_, o)| o.channel == ch).map(|(_, o)| o.tvd).unwrap_or(f64::NAN);
            if get(ShotChannel::Averaged) < get(ShotChannel::Ab).min(get(ShotChannel::Ba)) {
                wins += 1;
            }
            for (seed, o) in row {
                tvd.push(vec![
                    t.into(),
                    o.channel.as_str().into(),
                    mode.into(),
                    o.shots.unwrap_or(0).into(),
                    rep.into(),
                    (*seed).into(),
                    o.tvd.into(),
                ]);
                if c.histograms {
                    for (u, &p) in o.distribution.iter().enumerate() {
                        let count: Value = if o.counts.is_empty() { Value::Text(String::new()) } else { o.counts[u].into() };
                        hist.push(vec![
                            t.into(),
                            rep.into(),
                            o.channel.as_str().into(),
                            format!("{u:0n$b}").into(),
                            count,
                            p.into(),
                            dist.exact[u].into(),
                        ]);
                    }
                }
            }
        }
        summary.push(vec![
            t.into(),
            exact[0].into(),
            exact[1].into(),
            exact[2].into(),
            reps.into(),
            wins.into(),
            (wins as f64 / reps as f64).into(),
        ]);
    }
    let mut tables = vec![tvd, summary];
    if c.histograms {
        tables.push(hist);
    }
    Ok(Outcome {
        tables,
        notes: vec![
            "initial state |+>^n; bitstrings list qubit 0 first".into(),
            "the averaged channel splits its shots ceil(N/2), floor(N/2) between (A,B) and (B,A) and pools the counts".into(),
        ],
    })
}
