//! Imaginary-time iTEBD convergence.

use nusc_core::itebd::ed::extrapolate_energy_density;
use nusc_core::pauli::build_model;
use nusc_core::itebd::{init_unit_cell, local_hamiltonian, run_schedule, ConvergenceSchedule, ItebdOptions};

use super::{par_map, require_nonempty, Outcome};
use crate::config::ItebdConvergence;
use crate::error::{LabError, LabResult};
use crate::table::Table;

pub fn convergence(c: &ItebdConvergence) -> LabResult<Outcome> {
    let spec = c.model.build()?;
    require_nonempty("modes", &c.modes)?;
    if c.log_stride < 1 {
        return Err(LabError::config("log_stride", "must be at least 1"));
    }
    let schedule = ConvergenceSchedule::new(c.dtau_list.clone(), c.threshold, c.max_iterations)?;
    let model = spec.model().ok_or_else(|| LabError::config("model", "needs a named model"))?;
    let local = local_hamiltonian(model)?;
    let options = ItebdOptions {
        bond_dim: c.bond_dim,
        cutoff: c.cutoff,
    };
    let initial = init_unit_cell(local.cell_size, c.bond_dim, c.seed)?;

    let reference = if c.ed_sizes.is_empty() {
        None
    } else {
        let build = |l: usize| {
            let m = c.model.with("n", l as f64);
            build_model(&m.name, &m.params)
        };
        let ex = extrapolate_energy_density(build, &c.ed_sizes, c.seed)?;
        Some(ex)
    };

    let runs = par_map(&c.modes, |&mode| {
        let run = run_schedule(&initial, &spec, &schedule, mode, c.combine, &options)?;
        log::info!("{}", run.summary());
        Ok(run)
    })?;

    let mut log_table = Table::new(
        "",
        &["mode", "dtau", "iteration", "distance", "energy", "bond_dim", "discarded_weight"],
    );
    let mut summary = Table::new(
        "summary",
        &["mode", "combine", "iterations", "converged", "energy", "ed_energy", "energy_error", "seed"],
    );
    let mut stages = Table::new("stages", &["mode", "dtau", "iterations", "converged", "last_distance"]);
    let ed = reference.as_ref().map_or(f64::NAN, |r| r.limit);
    for run in &runs {
        let name = run.mode.as_str();
        for (i, e) in run.log.iter().enumerate() {
            let stage_end = run.log.get(i + 1).is_none_or(|n| n.dtau != e.dtau);
            if e.iteration % c.log_stride == 0 || stage_end {
                log_table.push(vec![
                    name.into(),
                    e.dtau.into(),
                    e.iteration.into(),
                    e.distance.into(),
                    e.energy.into(),
                    e.bond_dim.into(),
                    e.discarded_weight.into(),
                ]);
            }
        }
        for s in &run.stages {
            stages.push(vec![
                name.into(),
                s.dtau.into(),
                s.iterations.into(),
                s.converged.into(),
                s.last_distance.into(),
            ]);
        }
        let combine = match run.combine {
            nusc_core::itebd::Combine::Trajectories => "trajectories",
            nusc_core::itebd::Combine::Lcu => "lcu",
        };
        summary.push(vec![
            name.into(),
            combine.into(),
            run.iterations.into(),
            run.converged.into(),
            run.energy.into(),
            ed.into(),
            (run.energy - ed).into(),
            c.seed.into(),
        ]);
    }
    let mut notes = vec![format!(
        "cell size {}, D_p = {}, cutoff = {}, threshold = {}",
        local.cell_size, c.bond_dim, c.cutoff, c.threshold
    )];
    if let Some(r) = &reference {
        notes.push(format!(
            "ED reference: sizes {:?}, energies per site {:?}, 1/L^2 extrapolation {}",
            r.sizes, r.energies, r.limit
        ));
    }
    Ok(Outcome {
        tables: vec![log_table, summary, stages],
        notes,
    })
}
