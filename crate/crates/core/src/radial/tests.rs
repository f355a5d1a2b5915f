use super::*;

fn grid() -> RadialGrid {
    RadialGrid::standard()
}

fn hydrogenic(z: u32) -> RadialOrbitalSet {
    radial_scf(z, 1, &grid(), &RadialOptions::default()).unwrap()
}

#[test]
fn hydrogen_exact() {
    let o = hydrogenic(1);
    assert!((o.energies[0] + 0.25).abs() < 1e-6);
    assert!((o.total_energy + 0.25).abs() < 1e-6);
    assert!((o.overlap()[(0, 0)] - 1.0).abs() < 1e-8);
}

#[test]
fn hydrogenic_scaling_and_virial() {
    for z in 1..=3u32 {
        let o = hydrogenic(z);
        let zf = z as f64;
        let e = o.total_energy;
        assert!((o.energies[0] + zf * zf / 4.0).abs() < 1e-5, "Z={z}");
        let t = o.kinetic_expectations()[0];
        let v = o.nuclear_expectations()[0];
        assert!((t + e).abs() < 1e-3 * e.abs());
        assert!((v - 2.0 * e).abs() < 1e-3 * e.abs());
        let s = decay_fit(&o, None).unwrap()[0];
        assert!((s + zf / 2.0).abs() < 0.01 * zf / 2.0, "Z={z} slope {s}");
    }
}

#[test]
fn laplacian_norm_matches_closed_form() {
    // φ = e^{-r/2}/√(8π): ‖Δφ‖² = 4π∫ (φ'' + 2φ'/r)² r² dr
    let phi = |r: f64| (-r / 2.0).exp() / (8.0 * core::f64::consts::PI).sqrt();
    let lap = |r: f64| phi(r) * (0.25 - 1.0 / r);
    let n = 400_000;
    let (a, b) = (1e-9f64, 80.0f64);
    let dx = (b / a).ln() / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let r = a * ((k as f64 + 0.5) * dx).exp();
        acc += 4.0 * core::f64::consts::PI * lap(r).powi(2) * r * r * r * dx;
    }
    let exact = acc.sqrt();
    let o = hydrogenic(1);
    let got = h2norm_report(&o)[0];
    assert!((got - exact).abs() < 0.01 * exact, "{got} vs {exact}");
    let fine = radial_scf(1, 1, &RadialGrid::new(DEFAULT_R_MIN, DEFAULT_R_MAX, 2 * DEFAULT_POINTS).unwrap(), &RadialOptions::default())
        .unwrap();
    assert!((h2norm_report(&fine)[0] - got).abs() < 0.005 * got);
    let by_z: std::vec::Vec<f64> = (1..=3).map(|z| h2norm_report(&hydrogenic(z))[0]).collect();
    assert!(by_z.windows(2).all(|w| w[1] > w[0] && w[1].is_finite()));
}

#[test]
fn hydrogen_farfield() {
    let o = hydrogenic(1);
    let f = farfield_q_check(&o, 20.0);
    assert!(f.newton_deviation <= 1e-3);
    assert!(f.newton_monotone);
    assert!(f.bound_margin > 0.0);
    let q = pair_potential(&o, 0, 0);
    let r = o.grid.r();
    assert!(r.iter().zip(&q).all(|(r, q)| r * q <= 1.0 + 1e-9));
}

#[test]
fn weighted_norm_finite_below_threshold() {
    let o = hydrogenic(1);
    for frac in [0.5, 0.9, 0.99] {
        let w = weighted_tail_norm(&o, 0.25 * frac);
        assert!(w.value.is_finite() && w.value > 1.0);
    }
    let w = weighted_tail_norm(&o, 0.25 * 0.5);
    assert!(w.tail_fraction < 1e-6);
}

#[test]
fn bad_inputs_rejected() {
    assert!(RadialGrid::new(1e-5, 20.0, 4000).is_err());
    assert!(RadialGrid::new(1e-5, 60.0, 1000).is_err());
    assert!(matches!(radial_scf(1, 0, &grid(), &RadialOptions::default()), Err(Error::NoElectrons)));
    let short = RadialGrid::new(1e-5, 30.0, 4000).unwrap();
    assert!(matches!(radial_scf(1, 1, &short, &RadialOptions::default()), Err(Error::GridTooSmall(_))));
    let o = hydrogenic(1);
    assert!(matches!(decay_fit(&o, Some((1.0, 10.0))), Err(Error::BadWindow(_))));
    assert!(matches!(decay_fit(&o, Some((50.0, 400.0))), Err(Error::BadWindow(_))));
}

#[test]
fn augmented_matches_dense_fock() {
    let g = RadialGrid::unchecked(1e-3, 25.0, 120).unwrap();
    let m = g.m();
    let r = g.r().to_vec();
    let y1: Vec<f64> = (0..m).map(|a| r[a].sqrt() * r[a] * (-r[a]).exp()).collect();
    let y2: Vec<f64> = (0..m).map(|a| r[a].sqrt() * r[a] * (1.0 - r[a] / 2.0) * (-r[a] / 2.0).exp()).collect();
    let op = FockOp::new(&g, 2.0, &[(0.7, &y1), (1.0, &y2)]);
    let mut dense = DMatrix::zeros(m, m);
    for b in 0..m {
        let mut e = vec![0.0; m];
        e[b] = 1.0;
        dense.set_column(b, &DVector::from_vec(op.apply(&e)));
    }
    assert!((&dense - dense.transpose()).abs().max() < 1e-9 * dense.abs().max());
    let binv = DMatrix::from_diagonal(&DVector::from_iterator(m, (0..m).map(|a| 1.0 / r[a])));
    let vals = (&binv * &dense * &binv).symmetric_eigenvalues();
    for &sigma in &[-3.0, -1.0, -0.2, 0.0, 0.5] {
        let expect = vals.iter().filter(|&&v| v < sigma).count();
        assert_eq!(op.count_below(sigma), expect, "sigma {sigma}");
    }
}

