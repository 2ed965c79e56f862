//! Values with closed-form or independently computed references.

use std::collections::BTreeMap;

use nusc_core::channels::optimal_weight_two_term;
use nusc_core::itebd::ed::extrapolate_energy_density;
use nusc_core::pauli::{build_model, HamiltonianSpec, Model};
use nusc_core::shots::{distributions, total_variation, ShotChannel};

fn model(name: &str, kv: &[(&str, f64)]) -> HamiltonianSpec {
    let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    build_model(name, &p).unwrap()
}

#[test]
fn xy_chain_optimal_weight_is_27_over_48() {
    // J_A² = 5 + 6h², J_B² = 5 for the open six-site chain.
    let w = optimal_weight_two_term(&model("xy_chain", &[("n", 6.0), ("h", 1.0)])).unwrap();
    assert_eq!(w.p_opt, 27.0 / 48.0);
    assert_eq!((w.ja_sqr, w.jb_sqr), (11.0, 5.0));
    assert!((w.ratio_to_best_endpoint() - 55.0 / 496.0).abs() < 1e-15);
}

#[test]
fn heisenberg_ring_extrapolates_to_bethe_energy() {
    // Infinite XXX ring with unit couplings: e = 1 − 4 ln 2 per site.
    let bethe = 1.0 - 4.0 * std::f64::consts::LN_2;
    let ex = extrapolate_energy_density(|n| Model::HeisenbergChain { n }.build(), &[8, 10, 12], 1).unwrap();
    assert!((ex.limit - bethe).abs() < 2e-3, "{} vs {bethe}", ex.limit);
    assert!(ex.energies.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn averaged_distribution_beats_both_orderings_at_short_time() {
    let spec = model("ising_tl", &[("n", 5.0), ("mu", 2.0), ("lambda", 2.0)]);
    let d = distributions(&spec, 0.05).unwrap();
    let tvd = |c| total_variation(&d.channel(c), &d.exact);
    let (ab, ba, avg) = (tvd(ShotChannel::Ab), tvd(ShotChannel::Ba), tvd(ShotChannel::Averaged));
    assert!(avg < ab.min(ba), "{avg} {ab} {ba}");
    // First-order errors cancel in the average, so it is an order smaller.
    assert!(avg < 0.1 * ab.min(ba));
}
