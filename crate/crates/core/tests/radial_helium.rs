//! Two-orbital Z=2 radial run checked against a large even-tempered Gaussian
//! calculation of the same spinless model.

use hflab_core::radial::{
    decay_fit, farfield_q_check, radial_scf, weighted_tail_norm, RadialGrid, RadialOptions, DEFAULT_POINTS,
    DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use hflab_core::scf::{scf_solve, Guess, ScfOptions};
use hflab_core::molbasis::normalize_shells;
use hflab_core::{Atom, BasisName, BasisSet, Convention, IntegralTables, Molecule};

fn gaussian_oracle() -> (f64, Vec<f64>) {
    let mol = Molecule::new(vec![Atom { z: 2, position: [0.0; 3] }], 2).unwrap();
    let name = BasisName::EvenTempered { alpha0: 0.003, beta: 1.8, k: 34 };
    let basis = normalize_shells(&BasisSet::named(&name, &mol).unwrap()).unwrap();
    let t = IntegralTables::compute(&mol, &basis, Convention::Paper);
    let cp = scf_solve(&t, 2, &ScfOptions::default(), Guess::Core).unwrap().critical_point.unwrap();
    (cp.energy, cp.orbitals.energies.iter().copied().collect())
}

#[test]
fn helium_pair_matches_gaussian_limit() {
    let opts = RadialOptions::default();
    let coarse = radial_scf(2, 2, &RadialGrid::standard(), &opts).unwrap();
    let fine = radial_scf(2, 2, &RadialGrid::new(DEFAULT_R_MIN, DEFAULT_R_MAX, 2 * DEFAULT_POINTS).unwrap(), &opts).unwrap();
    assert!((coarse.total_energy - fine.total_energy).abs() < 1e-6);

    // second-order grid error, removed by Richardson extrapolation
    let extrapolated = fine.total_energy + (fine.total_energy - coarse.total_energy) / 3.0;
    let (e_gauss, eps_gauss) = gaussian_oracle();
    assert!((extrapolated - e_gauss).abs() < 1e-8, "{extrapolated} vs {e_gauss}");
    assert!((coarse.total_energy - e_gauss).abs() < 2e-7);
    for i in 0..2 {
        assert!((coarse.energies[i] - eps_gauss[i]).abs() < 1e-6);
    }
    assert!((coarse.total_energy + 1.0871254).abs() < 1e-6);

    let eps_min = coarse.energies.iter().map(|e| -e).fold(f64::INFINITY, f64::min);
    let slopes = decay_fit(&coarse, None).unwrap();
    for s in &slopes {
        assert!(*s <= -(0.9 * eps_min).sqrt() + 0.02);
    }
    let w = weighted_tail_norm(&coarse, 0.9 * eps_min);
    let w2 = weighted_tail_norm(&fine, 0.9 * eps_min);
    assert!(w.value.is_finite() && (w.value - w2.value).abs() < 0.01 * w.value);

    let f = farfield_q_check(&coarse, 20.0);
    assert!(f.bound_margin > 0.0);
    assert!(f.newton_deviation <= 1e-3);
    assert!(f.offdiag_rq < 1e-8);
}
