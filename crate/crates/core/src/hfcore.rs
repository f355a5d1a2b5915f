//! The energy functional, Fock matrix, pair integrals and the Lagrangian of
//! the spinless N-orbital model in a finite basis.
//!
//! Densities are `D = CCᵀ` with no spin factor; the two-electron part is
//! `½ tr(D (J[D] - K[D]))`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrals::IntegralTables;
use crate::linalg::{sym_eigen_sorted, symmetrize};

/// Orbital coefficients (columns) with their multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalSet {
    pub coeffs: DMatrix<f64>,
    pub energies: DVector<f64>,
}

impl OrbitalSet {
    pub fn new(coeffs: DMatrix<f64>, energies: DVector<f64>) -> Result<Self> {
        if coeffs.ncols() != energies.len() {
            return Err(Error::Dimension("one energy per orbital"));
        }
        Ok(Self { coeffs, energies })
    }

    /// Orbitals with all multipliers zero.
    pub fn from_coeffs(coeffs: DMatrix<f64>) -> Self {
        let n = coeffs.ncols();
        Self { coeffs, energies: DVector::zeros(n) }
    }

    pub fn n_orbitals(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn orbital(&self, i: usize) -> DVector<f64> {
        self.coeffs.column(i).into_owned()
    }

    pub fn density(&self) -> DMatrix<f64> {
        density_matrix(&self.coeffs)
    }

    /// `max |CᵀSC - I|`.
    pub fn constraint_error(&self, overlap: &DMatrix<f64>) -> f64 {
        let g = self.coeffs.transpose() * overlap * &self.coeffs;
        let n = g.nrows();
        (g - DMatrix::identity(n, n)).abs().max()
    }
}

pub fn density_matrix(coeffs: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(coeffs * coeffs.transpose()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrices {
    pub coulomb: DMatrix<f64>,
    pub exchange: DMatrix<f64>,
    pub fock: DMatrix<f64>,
}

impl FockMatrices {
    /// `J - K`.
    pub fn two_electron(&self) -> DMatrix<f64> {
        &self.coulomb - &self.exchange
    }
}

pub fn build_fock(density: &DMatrix<f64>, tables: &IntegralTables) -> FockMatrices {
    let coulomb = symmetrize(&tables.eri.coulomb(density));
    let exchange = symmetrize(&tables.eri.exchange(density));
    let fock = tables.hcore() + &coulomb - &exchange;
    FockMatrices { coulomb, exchange, fock }
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(&b.transpose()).sum()
}

/// `E = tr(Dh) + ½ tr(D(J - K))` with `J, K` built from `D`.
pub fn energy_from_density(density: &DMatrix<f64>, tables: &IntegralTables) -> f64 {
    let f = build_fock(density, tables);
    energy_with_fock(density, &f, tables)
}

pub(crate) fn energy_with_fock(density: &DMatrix<f64>, f: &FockMatrices, tables: &IntegralTables) -> f64 {
    trace_product(density, &tables.hcore()) + 0.5 * trace_product(density, &f.two_electron())
}

pub fn hf_energy(orbitals: &OrbitalSet, tables: &IntegralTables) -> f64 {
    energy_from_density(&orbitals.density(), tables)
}

/// Coulomb and exchange integrals between orbital pairs,
/// `J_ij = (ii|jj)`, `K_ij = (ij|ji)`.
pub fn coulomb_exchange_pairs(orbitals: &OrbitalSet, tables: &IntegralTables) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = orbitals.n_orbitals();
    let cols: Vec<DVector<f64>> = (0..n).map(|i| orbitals.orbital(i)).collect();
    let mut j = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for a in 0..n {
        let da = &cols[a] * cols[a].transpose();
        let ja = tables.eri.coulomb(&da);
        let ka = tables.eri.exchange(&da);
        for b in 0..n {
            j[(a, b)] = (cols[b].transpose() * &ja * &cols[b])[0];
            k[(a, b)] = (cols[b].transpose() * &ka * &cols[b])[0];
        }
    }
    (symmetrize(&j), symmetrize(&k))
}

/// `Σ_i ⟨φ_i, hφ_i⟩ + Σ_{i<j} (J_ij - K_ij)`.
pub fn energy_from_pairs(orbitals: &OrbitalSet, tables: &IntegralTables) -> f64 {
    let (j, k) = coulomb_exchange_pairs(orbitals, tables);
    let h = tables.hcore();
    let n = orbitals.n_orbitals();
    let mut e = 0.0;
    for i in 0..n {
        let c = orbitals.orbital(i);
        e += (c.transpose() * &h * &c)[0];
        for m in 0..i {
            e += j[(m, i)] - k[(m, i)];
        }
    }
    e
}

/// Value and gradient of `f(Φ, e) = E(Φ) - Σ ε_i(‖φ_i‖² - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPoint {
    pub value: f64,
    /// Covectors `(F - ε_i S) c_i`, one column per orbital.
    pub orbital_gradient: DMatrix<f64>,
    /// `1 - ‖φ_i‖²`.
    pub constraint: DVector<f64>,
}

impl LagrangianPoint {
    /// `df` along `[Φ̃, ẽ]`: `Σ 2 c̃_iᵀ F_i + Σ ẽ_i (1 - ‖φ_i‖²)`.
    pub fn directional(&self, tangent: &OrbitalSet) -> f64 {
        2.0 * tangent.coeffs.component_mul(&self.orbital_gradient).sum() + tangent.energies.dot(&self.constraint)
    }

    /// Largest Euclidean norm over the orbital blocks and the constraint block.
    pub fn residual(&self) -> f64 {
        let orb = (0..self.orbital_gradient.ncols())
            .map(|i| self.orbital_gradient.column(i).norm())
            .fold(0.0f64, f64::max);
        orb.max(self.constraint.norm())
    }
}

pub fn lagrangian(point: &OrbitalSet, tables: &IntegralTables) -> LagrangianPoint {
    let d = point.density();
    let f = build_fock(&d, tables);
    let s = &tables.overlap;
    let n = point.n_orbitals();
    let mut grad = DMatrix::zeros(tables.n(), n);
    let mut constraint = DVector::zeros(n);
    let mut value = energy_with_fock(&d, &f, tables);
    for i in 0..n {
        let c = point.orbital(i);
        let sc = s * &c;
        let eps = point.energies[i];
        grad.set_column(i, &(&f.fock * &c - &sc * eps));
        let norm2 = c.dot(&sc);
        constraint[i] = 1.0 - norm2;
        value -= eps * (norm2 - 1.0);
    }
    LagrangianPoint { value, orbital_gradient: grad, constraint }
}

/// The pairing `⟨⟨[Φ¹,e¹],[Φ²,e²]⟩⟩ = Σ 2⟨φ_i¹,φ_i²⟩ + Σ ε_i¹ε_i²`.
pub fn pairing(a: &OrbitalSet, b: &OrbitalSet, overlap: &DMatrix<f64>) -> f64 {
    2.0 * (a.coeffs.transpose() * overlap * &b.coeffs).trace() + a.energies.dot(&b.energies)
}

/// `E(Φ, Φ̃) = Σ⟨φ_i, hφ_i⟩ + Σ⟨φ̃_i, F(Φ)φ̃_i⟩`.
pub fn bivariate_energy(a: &OrbitalSet, b: &OrbitalSet, tables: &IntegralTables) -> f64 {
    let da = a.density();
    let db = b.density();
    let f = build_fock(&da, tables);
    trace_product(&da, &tables.hcore()) + trace_product(&db, &f.fock)
}

/// Eigenvalues (ascending) of `CᵀFC`.
pub fn projected_fock_eigenvalues(coeffs: &DMatrix<f64>, fock: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = coeffs.transpose() * fock * coeffs;
    Ok(sym_eigen_sorted(&m)?.0)
}
