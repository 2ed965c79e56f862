use super::*;
use crate::linalg::{evolve_unitary, svd_truncate};
use crate::pauli::{Grouping, Model};

fn heisenberg() -> (HamiltonianSpec, LocalHamiltonian) {
    let model = Model::HeisenbergChain { n: 4 };
    (model.build().unwrap(), local_hamiltonian(&model).unwrap())
}

fn close(a: &Matrix, b: &Matrix) -> f64 {
    let mut d = a.clone();
    d.axpy(C64::new(-1.0, 0.0), b);
    d.frobenius_norm()
}

/// A cell with bond dimension > 1 that is far from canonical: random
/// non-unitary gates applied without re-canonicalization.
fn scrambled(seed: u64, width: usize) -> MpsUnitCell {
    let mut c = init_unit_cell(width, 8, seed).unwrap();
    let p = 1usize << width;
    for k in 0..6u64 {
        let h = Matrix::from_fn(p, p, |i, j| {
            let x = ((i * 7 + j * 13 + k as usize * 5 + seed as usize) % 11) as f64 / 11.0;
            C64::new(x - 0.5, 0.0)
        })
        .hermitian_part();
        let u = evolve_unitary(&h, 1.3).unwrap();
        let g = u.matmul(&imaginary_evolve_with(&hermitian_eigen(&h).unwrap(), 0.4));
        c.apply_gate(k as usize % width, width, &g, 8, 1e-12).unwrap();
    }
    c
}

#[test]
fn identity_gate_leaves_state_unchanged() {
    let mut c = scrambled(3, 2);
    c.canonicalize(8, 1e-12).unwrap();
    let before = c.window_rdm(0, 2);
    let spectrum: Vec<f64> = c.schmidt(0).to_vec();
    c.apply_gate(0, 2, &Matrix::identity(4), 8, 1e-12).unwrap();
    c.canonicalize(8, 1e-12).unwrap();
    assert!(close(&before, &c.window_rdm(0, 2)) < 1e-10);
    for (x, y) in spectrum.iter().zip(c.schmidt(0)) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn canonicalize_reaches_canonical_form_and_keeps_the_state() {
    for width in [2, 3] {
        let mut c = scrambled(11, width);
        assert!(c.canonical_residual() > 1e-3);
        let local = if width == 2 {
            heisenberg().1
        } else {
            local_hamiltonian(&Model::ZxzField {
                n: 6,
                grouping: Grouping::Sublattice,
            })
            .unwrap()
        };
        let oracle = mixed_energy_density(&c, &c, &local).unwrap();
        c.canonicalize(8, 1e-12).unwrap();
        assert!(c.canonical_residual() < 1e-8, "{}", c.canonical_residual());
        let e = energy_canonical(&c, &local);
        assert!((e - oracle).abs() < 1e-8, "{e} vs {oracle}");
        for r in 0..width {
            let s = c.schmidt(r);
            assert!((s.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn energy_density_recanonicalizes() {
    let (_, local) = heisenberg();
    let c = scrambled(5, 2);
    let oracle = mixed_energy_density(&c, &c, &local).unwrap();
    assert!((energy_density(&c, &local).unwrap() - oracle).abs() < 1e-8);
}

#[test]
fn all_up_product_state_has_unit_bond_energy() {
    let (_, local) = heisenberg();
    let up = SiteTensor::new(1, 1, vec![C64::new(1.0, 0.0), ZERO]).unwrap();
    let c = MpsUnitCell::from_parts(vec![up.clone(), up], vec![vec![1.0], vec![1.0]]).unwrap();
    // One bond per site.
    assert!((energy_density(&c, &local).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn one_step_on_product_state_matches_dense_chain() {
    let (_, local) = heisenberg();
    let c0 = init_unit_cell(2, 8, 21).unwrap();
    let dtau = 0.3;
    let gate = imaginary_evolve_with(&hermitian_eigen(&local.blocks[0].matrix).unwrap(), dtau);
    let mut c = c0.clone();
    imaginary_step(&mut c, &gate, 0, 8, 1e-12).unwrap();
    // Dense: four sites of the product state, gate on bonds (0,1) and (2,3).
    let site = |r: usize| {
        let g = c0.site(r);
        Matrix::from_vec(2, 1, vec![g.get(0, 0, 0), g.get(0, 1, 0)])
    };
    let psi = site(0).kron(&site(1)).kron(&site(0)).kron(&site(1));
    let psi = gate.kron(&gate).matmul(&psi);
    let mut rho = psi.matmul(&psi.adjoint());
    rho = rho.scale_real(1.0 / rho.trace().re);
    assert!(close(&rho, &c.window_rdm(0, 4)) < 1e-8);
    assert!(c.canonical_residual() < 1e-10);
}

#[test]
fn discarded_weight_matches_dropped_spectrum() {
    let (_, local) = heisenberg();
    let mut c = scrambled(8, 2);
    c.canonicalize(8, 1e-12).unwrap();
    let gate = imaginary_evolve_with(&hermitian_eigen(&local.blocks[0].matrix).unwrap(), 0.7);
    // Full spectrum of the gated window.
    let theta = c.window(0, 2, true);
    let dl = theta.rows() / 4;
    let mut g = Matrix::zeros(theta.rows(), theta.cols());
    for a in 0..dl {
        for s2 in 0..4 {
            for s in 0..4 {
                for b in 0..theta.cols() {
                    g[(a * 4 + s2, b)] += gate[(s2, s)] * theta[(a * 4 + s, b)];
                }
            }
        }
    }
    let mat = Matrix::from_vec(dl * 2, 2 * theta.cols(), g.into_vec());
    let full = svd_truncate(&mat, usize::MAX, 0.0).unwrap();
    let total: f64 = full.s.iter().map(|x| x * x).sum();
    let keep = 3;
    let dropped: f64 = full.s[keep..].iter().map(|x| x * x).sum::<f64>() / total;
    let reported = c.apply_gate(0, 2, &gate, keep, 1e-12).unwrap();
    assert!(dropped > 1e-6);
    assert!((reported - dropped).abs() < 1e-12, "{reported} vs {dropped}");
    let kept: f64 = full.s[..keep].iter().map(|x| x * x).sum::<f64>() / total;
    assert!((1.0 - kept - reported).abs() < 1e-12);
}

#[test]
fn lcu_of_identical_states_matches_trajectories() {
    let (_, local) = heisenberg();
    let mut c = scrambled(2, 2);
    c.canonicalize(8, 1e-12).unwrap();
    let states = vec![c.clone(), c.clone()];
    let (e, radii) = lcu_energy_density(&states, &[0.5, 0.5], &local).unwrap();
    assert!((radii[0] - 1.0).abs() < 1e-10);
    assert!((e - energy_density(&c, &local).unwrap()).abs() < 1e-6);

    let mut d = scrambled(9, 2);
    d.canonicalize(8, 1e-12).unwrap();
    let (e2, radii) = lcu_energy_density(&[c.clone(), d.clone()], &[0.5, 0.5], &local).unwrap();
    assert!(radii[0] < 1.0 - 1e-3);
    let avg = 0.5 * (energy_density(&c, &local).unwrap() + energy_density(&d, &local).unwrap());
    assert!((e2 - avg).abs() < 1e-12);
}

#[test]
fn energy_decreases_at_fixed_dtau() {
    let (spec, _) = heisenberg();
    let init = init_unit_cell(2, 16, 4).unwrap();
    let schedule = ConvergenceSchedule::new(vec![0.05], 1e-10, 300).unwrap();
    let options = ItebdOptions {
        bond_dim: 16,
        cutoff: 1e-12,
    };
    let run = run_schedule(&init, &spec, &schedule, FormulaMode::K2, Combine::Trajectories, &options)
        .unwrap();
    for w in run.log.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12, "{} -> {}", w[0].energy, w[1].energy);
    }
    assert!(run.energy < -1.7);
}

#[test]
fn schedule_validation() {
    assert!(ConvergenceSchedule::new(vec![0.01, 0.1], 1e-10, 10).is_err());
    assert!(ConvergenceSchedule::new(vec![0.1], 0.0, 10).is_err());
    assert!(ConvergenceSchedule::new(vec![], 1e-10, 10).is_err());
    assert!(ConvergenceSchedule::new(vec![0.1, 0.01], 1e-10, 10).is_ok());
    let s = ConvergenceSchedule::default();
    assert_eq!(s.dtau_list(), &[0.1, 0.01, 0.001]);
}

#[test]
fn unsupported_model_is_rejected() {
    let spec = Model::XyChain { n: 4, h: 1.0 }.build().unwrap();
    let init = init_unit_cell(2, 4, 1).unwrap();
    let r = run_schedule(
        &init,
        &spec,
        &ConvergenceSchedule::default(),
        FormulaMode::K1,
        Combine::Trajectories,
        &ItebdOptions::default(),
    );
    assert!(r.is_err());
}
