use super::*;
use crate::molbasis::{normalize_shells, primitive_norm, Atom, Primitive, Shell};
use std::vec;

fn atom(z: u32, x: f64) -> Atom {
    Atom { z, position: [x, 0.0, 0.0] }
}

fn s_shell(center: usize, alpha: f64) -> Shell {
    Shell { center, l: 0, primitives: vec![Primitive { exponent: alpha, coeff: 1.0 }] }
}

fn normalized(mol: &Molecule, shells: Vec<Shell>) -> BasisSet {
    normalize_shells(&BasisSet::new(shells, mol).unwrap()).unwrap()
}

fn prim(center: [f64; 3], powers: [usize; 3], alpha: f64) -> Function {
    Function { center, powers, prims: vec![(alpha, 1.0)] }
}

/// Radial-quadrature Coulomb energy of two concentric spherical densities,
/// using the shell theorem for the potential.
fn concentric_coulomb(rho_a: impl Fn(f64) -> f64, rho_b: impl Fn(f64) -> f64, r_max: f64) -> f64 {
    let n = 200_000;
    let h = r_max / n as f64;
    let r: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let shell_a: Vec<f64> = r.iter().map(|&x| 4.0 * PI * x * x * rho_a(x)).collect();
    // inner charge and outer potential via trapezoid cumulative sums
    let mut inner = vec![0.0; n + 1];
    for k in 1..=n {
        inner[k] = inner[k - 1] + 0.5 * h * (shell_a[k] + shell_a[k - 1]);
    }
    let outer_term: Vec<f64> = r.iter().map(|&x| 4.0 * PI * x * rho_a(x)).collect();
    let mut outer = vec![0.0; n + 1];
    for k in (0..n).rev() {
        outer[k] = outer[k + 1] + 0.5 * h * (outer_term[k] + outer_term[k + 1]);
    }
    let mut total = 0.0;
    for k in 1..=n {
        let pot = |i: usize| if i == 0 { outer[0] } else { inner[i] / r[i] + outer[i] };
        let f0 = 4.0 * PI * r[k - 1] * r[k - 1] * rho_b(r[k - 1]) * pot(k - 1);
        let f1 = 4.0 * PI * r[k] * r[k] * rho_b(r[k]) * pot(k);
        total += 0.5 * h * (f0 + f1);
    }
    total
}

#[test]
fn normalized_s_self_overlap() {
    let mol = Molecule::new(vec![atom(1, 0.0)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, 0.7)]);
    assert!((overlap_matrix(&mol, &b)[(0, 0)] - 1.0).abs() < 1e-14);
}

#[test]
fn two_center_s_overlap_closed_form() {
    let (alpha, r) = (0.9, 1.3);
    let mol = Molecule::new(vec![atom(1, 0.0), atom(1, r)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, alpha), s_shell(1, alpha)]);
    let s = overlap_matrix(&mol, &b);
    assert!((s[(0, 1)] - (-alpha * r * r / 2.0).exp()).abs() < 1e-14);
}

#[test]
fn kinetic_of_minus_laplacian() {
    let alpha = 0.37;
    let mol = Molecule::new(vec![atom(1, 0.0)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, alpha), Shell { center: 0, l: 1, primitives: vec![Primitive { exponent: alpha, coeff: 1.0 }] }]);
    let t = kinetic_matrix(&mol, &b);
    assert!((t[(0, 0)] - 3.0 * alpha).abs() < 1e-14);
    for k in 1..4 {
        assert!((t[(k, k)] - 5.0 * alpha).abs() < 1e-14);
    }
}

#[test]
fn nuclear_attraction_same_center() {
    let alpha = 1.1;
    let mol = Molecule::new(vec![atom(3, 0.0)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, alpha)]);
    let v = nuclear_matrix(&mol, &b)[(0, 0)];
    assert!((v + 3.0 * 2.0 * (2.0 * alpha / PI).sqrt()).abs() < 1e-13);
}

#[test]
fn ssss_against_radial_quadrature() {
    let alpha = 0.8;
    let mol = Molecule::new(vec![atom(1, 0.0)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, alpha)]);
    let eri = eri_tensor(&mol, &b);
    let n = (2.0 * alpha / PI).powf(1.5);
    let rho = |r: f64| n * (-2.0 * alpha * r * r).exp();
    let q = concentric_coulomb(rho, rho, 12.0);
    assert!((eri.get(0, 0, 0, 0) - q).abs() < 1e-8, "{} vs {}", eri.get(0, 0, 0, 0), q);
}

#[test]
fn mixed_exponent_coulomb_matrix_against_quadrature() {
    // three concentric s functions; J[D] elements from a spherical density
    let exps = [2.0, 0.6, 0.2];
    let mol = Molecule::new(vec![atom(2, 0.0)], 1).unwrap();
    let b = normalized(&mol, exps.iter().map(|&a| s_shell(0, a)).collect());
    let eri = eri_tensor(&mol, &b);
    let d = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, -0.2, 0.1, 0.3, 0.05, -0.2, 0.05, 0.4]);
    let j = eri.coulomb(&d);
    let norms: Vec<f64> = exps.iter().map(|&a| primitive_norm(a, 0)).collect();
    let chi = |k: usize, r: f64| norms[k] * (-exps[k] * r * r).exp();
    let rho = |r: f64| {
        let mut s = 0.0;
        for a in 0..3 {
            for c in 0..3 {
                s += d[(a, c)] * chi(a, r) * chi(c, r);
            }
        }
        s
    };
    for mu in 0..3 {
        for nu in 0..3 {
            let q = concentric_coulomb(rho, |r| chi(mu, r) * chi(nu, r), 30.0);
            assert!((j[(mu, nu)] - q).abs() < 1e-6, "J[{mu},{nu}] {} vs {}", j[(mu, nu)], q);
        }
    }
}

#[test]
fn separated_densities_approach_inverse_distance() {
    let r = 50.0;
    let mol = Molecule::new(vec![atom(1, 0.0), atom(1, r)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, 0.5), s_shell(1, 1.2)]);
    let eri = eri_tensor(&mol, &b);
    assert!((eri.get(0, 0, 1, 1) - 1.0 / r).abs() < 1e-6);
}

#[test]
fn eight_fold_symmetry_exact() {
    let mol = Molecule::new(vec![atom(1, 0.0), atom(2, 1.1)], 1).unwrap();
    let b = normalized(
        &mol,
        vec![s_shell(0, 1.3), s_shell(1, 0.7), Shell { center: 1, l: 1, primitives: vec![Primitive { exponent: 0.9, coeff: 1.0 }] }],
    );
    let eri = eri_tensor(&mol, &b);
    let n = eri.n();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = eri.get(i, j, k, l);
                    assert_eq!(v, eri.get(j, i, k, l));
                    assert_eq!(v, eri.get(i, j, l, k));
                    assert_eq!(v, eri.get(k, l, i, j));
                }
            }
        }
    }
    let back = EriTensor::from_unique(n, &eri.unique()).unwrap();
    assert_eq!(back, eri);
}

/// `p_x` at `A` is `(1/2α) ∂/∂A_x` of the `s` primitive at `A`.
fn derivative_oracle(value: impl Fn([f64; 3]) -> f64, a: [f64; 3], alpha: f64) -> f64 {
    let h = 1e-4;
    let shift = |d: f64| [a[0] + d, a[1], a[2]];
    let d1 = (value(shift(h)) - value(shift(-h))) / (2.0 * h);
    let d2 = (value(shift(2.0 * h)) - value(shift(-2.0 * h))) / (4.0 * h);
    (4.0 * d1 - d2) / 3.0 / (2.0 * alpha)
}

#[test]
fn p_functions_match_center_derivatives() {
    let a = [0.2, -0.1, 0.3];
    let bpos = [-0.5, 0.4, 0.1];
    let alpha = 0.8;
    let fb = prim(bpos, [0, 0, 0], 1.1);
    let fc = prim([0.3, 0.6, -0.4], [0, 1, 0], 0.6);
    let fd = prim(bpos, [0, 0, 1], 0.9);
    let px = prim(a, [1, 0, 0], alpha);

    let s_fd = derivative_oracle(|c| overlap_element(&prim(c, [0, 0, 0], alpha), &fb), a, alpha);
    assert!((overlap_element(&px, &fb) - s_fd).abs() < 1e-9);

    let t_fd = derivative_oracle(|c| kinetic_element(&prim(c, [0, 0, 0], alpha), &fd), a, alpha);
    assert!((kinetic_element(&px, &fd) - t_fd).abs() < 1e-9);

    let mol = Molecule::new(vec![atom(2, 0.0), Atom { z: 1, position: [0.4, 0.7, -0.2] }], 1).unwrap();
    let v_fd = derivative_oracle(|c| nuclear_element(&prim(c, [0, 0, 0], alpha), &fc, &mol), a, alpha);
    assert!((nuclear_element(&px, &fc, &mol) - v_fd).abs() < 1e-9);

    let eri_of = |f: &Function| {
        eri_element(&prim_pairs(f, &fb), &prim_pairs(&fc, &fd), f, &fb, &fc, &fd)
    };
    let e_fd = derivative_oracle(|c| eri_of(&prim(c, [0, 0, 0], alpha)), a, alpha);
    assert!((eri_of(&px) - e_fd).abs() < 1e-9);
}

#[test]
fn translation_invariance() {
    let mol = Molecule::new(vec![atom(3, 0.0), atom(1, 1.6)], 2).unwrap();
    let shells = vec![
        s_shell(0, 2.0),
        Shell { center: 0, l: 1, primitives: vec![Primitive { exponent: 0.5, coeff: 1.0 }] },
        s_shell(1, 0.9),
    ];
    let b = normalized(&mol, shells);
    let shifted = mol.translated([3.1, -7.2, 0.4]);
    let t1 = IntegralTables::compute(&mol, &b, Convention::Paper);
    let t2 = IntegralTables::compute(&shifted, &b, Convention::Paper);
    assert!((&t1.overlap - &t2.overlap).abs().max() < 1e-12);
    assert!((&t1.kinetic - &t2.kinetic).abs().max() < 1e-12);
    assert!((&t1.nuclear - &t2.nuclear).abs().max() < 1e-12);
    let diff = t1.eri.unique().iter().zip(t2.eri.unique()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-12);
}

#[test]
fn hcore_follows_convention() {
    let mol = Molecule::new(vec![atom(1, 0.0)], 1).unwrap();
    let b = normalized(&mol, vec![s_shell(0, 1.0)]);
    let p = IntegralTables::compute(&mol, &b, Convention::Paper);
    let s = IntegralTables::compute(&mol, &b, Convention::Standard);
    assert!((p.hcore()[(0, 0)] - (3.0 - 2.0 * (2.0 / PI).sqrt())).abs() < 1e-14);
    assert!((s.hcore()[(0, 0)] - (1.5 - 2.0 * (2.0 / PI).sqrt())).abs() < 1e-14);
}
