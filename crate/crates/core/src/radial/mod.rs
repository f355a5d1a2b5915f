//! Radial Hartree–Fock for closed s-shell atoms in the spinless N-orbital
//! model, with `h = -d²/dr² - Z/r` acting on reduced orbitals `u = rφ`.
//!
//! Discretization: log grid `r_a = r_min e^{a h}`, unknowns `y = u/√r` at all
//! nodes but the last (where `u = 0`), 3-point differences in `ln r` and a
//! ghost node enforcing `u ∝ r` at the origin. The exchange operator is dense
//! in `y`; it is handled exactly by an augmented banded system whose Schur
//! complement is the discrete Fock operator, so inertia counts give
//! eigenvalues by bisection.

mod analysis;
mod banded;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use banded::SymBand;

pub use analysis::{
    decay_fit, diagonal_q_profile, farfield_q_check, h2norm_report, pair_potential, weighted_tail_norm, FarfieldReport,
    WeightedNorm,
};

pub const MIN_R_MAX: f64 = 30.0;
pub const MIN_POINTS: usize = 2000;
pub const DEFAULT_R_MIN: f64 = 1e-5;
pub const DEFAULT_R_MAX: f64 = 150.0;
pub const DEFAULT_POINTS: usize = 16000;
/// Largest relative amplitude tolerated over the outermost 1% of nodes.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Relative width at which eigenvalue bisection stops.
const SHIFT_TOL: f64 = 1e-7;
const INVERSE_STEPS: usize = 4;
/// Relative half-width of the inertia check on a warm-started level.
const WARM_BRACKET: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
    h: f64,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max >= MIN_R_MAX) {
            return Err(Error::InvalidGrid("r_max must be at least 30"));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid("at least 2000 points required"));
        }
        Self::build(r_min, r_max, n_points)
    }

    /// `DEFAULT_R_MIN..DEFAULT_R_MAX` with `DEFAULT_POINTS` nodes.
    pub fn standard() -> Self {
        Self::build(DEFAULT_R_MIN, DEFAULT_R_MAX, DEFAULT_POINTS).expect("default grid is valid")
    }

    /// No lower limits on extent or resolution; for small test problems.
    pub fn unchecked(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        Self::build(r_min, r_max, n_points)
    }

    fn build(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::InvalidGrid("need 0 < r_min < r_max"));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid("at least 3 points required"));
        }
        let h = (r_max / r_min).ln() / (n_points - 1) as f64;
        let mut r: Vec<f64> = (0..n_points).map(|a| r_min * (a as f64 * h).exp()).collect();
        r[n_points - 1] = r_max;
        Ok(Self { r, h })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn n_points(&self) -> usize {
        self.r.len()
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Interior unknowns (all nodes but `r_max`).
    fn m(&self) -> usize {
        self.r.len() - 1
    }

    /// Quadrature weight `r_a h` of `dr`.
    #[inline]
    fn weight(&self, a: usize) -> f64 {
        self.r[a] * self.h
    }

    /// `(K v)_a = Σ_b v_b / max(r_a, r_b)` over interior nodes.
    fn coulomb_apply(&self, v: &[f64]) -> Vec<f64> {
        let m = v.len();
        let mut out = vec![0.0; m];
        let mut inner = 0.0;
        for a in 0..m {
            inner += v[a];
            out[a] = inner / self.r[a];
        }
        let mut outer = 0.0;
        for a in (0..m).rev() {
            out[a] += outer;
            outer += v[a] / self.r[a];
        }
        out
    }

    /// Kinetic part in `y`: `(1/h²) tridiag(-1, 2, -1) + ¼` with the ghost
    /// node `y_{-1} = y_0 e^{-h/2}`.
    fn kinetic_diag(&self, a: usize) -> f64 {
        let h2 = self.h * self.h;
        let ghost = if a == 0 { (-self.h / 2.0).exp() } else { 0.0 };
        (2.0 - ghost) / h2 + 0.25
    }

    fn kinetic_apply(&self, y: &[f64]) -> Vec<f64> {
        let m = y.len();
        let off = -1.0 / (self.h * self.h);
        (0..m)
            .map(|a| {
                let mut s = self.kinetic_diag(a) * y[a];
                if a > 0 {
                    s += off * y[a - 1];
                }
                if a + 1 < m {
                    s += off * y[a + 1];
                }
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    pub max_iter: usize,
    pub tol_energy: f64,
    pub tol_eigenvalue: f64,
    /// Weight of the previous orbitals in the next Fock operator.
    pub damping: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self { max_iter: 300, tol_energy: 1e-12, tol_eigenvalue: 1e-10, damping: 0.0 }
    }
}

/// Discrete Fock operator built from weighted orbitals `(w_k, y_k)`.
struct FockOp<'g> {
    grid: &'g RadialGrid,
    /// `r²(V + v_J)` per interior node.
    potential: Vec<f64>,
    /// `√w_k r² y_k`, so that `G = h Σ_k diag(e_k) K diag(e_k)`.
    exchange: Vec<Vec<f64>>,
}

impl<'g> FockOp<'g> {
    fn new(grid: &'g RadialGrid, z: f64, orbitals: &[(f64, &[f64])]) -> Self {
        let m = grid.m();
        let r = grid.r();
        let mut rho = vec![0.0; m];
        for &(w, y) in orbitals {
            for a in 0..m {
                rho[a] += w * r[a] * r[a] * y[a] * y[a] * grid.h;
            }
        }
        let vj = grid.coulomb_apply(&rho);
        let potential = (0..m).map(|a| -z * r[a] + r[a] * r[a] * vj[a]).collect();
        let exchange = orbitals
            .iter()
            .map(|&(w, y)| (0..m).map(|a| w.sqrt() * r[a] * r[a] * y[a]).collect())
            .collect();
        Self { grid, potential, exchange }
    }

    fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.grid.kinetic_apply(y);
        for a in 0..y.len() {
            out[a] += self.potential[a] * y[a];
        }
        for e in &self.exchange {
            let ey: Vec<f64> = e.iter().zip(y).map(|(a, b)| a * b).collect();
            let k = self.grid.coulomb_apply(&ey);
            for a in 0..y.len() {
                out[a] -= self.grid.h * e[a] * k[a];
            }
        }
        out
    }

    /// `[[A - σB, -h E_k], [-h E_k, h K⁻¹]]`, interleaved per node as
    /// `(y_a, z_{1,a}, …, z_{K,a})`.
    fn augmented(&self, sigma: f64) -> SymBand {
        let g = self.grid;
        let m = g.m();
        let kk = self.exchange.len();
        let w = kk + 1;
        let mut band = SymBand::zeros(m * w, w);
        let r = g.r();
        let h = g.h;
        let off = -1.0 / (h * h);
        let s = |a: usize| if a < m { 1.0 / r[a] } else { 0.0 };
        for a in 0..m {
            let ya = a * w;
            band.add(ya, ya, g.kinetic_diag(a) + self.potential[a] - sigma * r[a] * r[a]);
            if a + 1 < m {
                band.add(ya + w, ya, off);
            }
            let kinv_diag = 1.0 / (s(a) - s(a + 1)) + if a >= 1 { 1.0 / (s(a - 1) - s(a)) } else { 0.0 };
            for (k, e) in self.exchange.iter().enumerate() {
                let za = ya + 1 + k;
                band.add(za, ya, -h * e[a]);
                band.add(za, za, h * kinv_diag);
                if a >= 1 {
                    band.add(za, za - w, -h / (s(a - 1) - s(a)));
                }
            }
        }
        band
    }

    fn count_below(&self, sigma: f64) -> usize {
        self.augmented(sigma).factor().negative_count()
    }

    /// Solves `(A_F - σB) y = rhs` through the augmented system.
    fn shifted_solve(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let m = self.grid.m();
        let w = self.exchange.len() + 1;
        let mut full = vec![0.0; m * w];
        for a in 0..m {
            full[a * w] = rhs[a];
        }
        let x = self.augmented(sigma).factor().solve(&full);
        (0..m).map(|a| x[a * w]).collect()
    }

    fn rayleigh(&self, y: &[f64]) -> f64 {
        let ay = self.apply(y);
        let r = self.grid.r();
        let num: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let den: f64 = y.iter().enumerate().map(|(a, v)| r[a] * r[a] * v * v).sum();
        num / den
    }
}

/// `h Σ r² y_i y_j`, the discrete `∫ u_i u_j dr`.
fn b_dot(grid: &RadialGrid, x: &[f64], y: &[f64]) -> f64 {
    let r = grid.r();
    x.iter().zip(y).enumerate().map(|(a, (p, q))| r[a] * r[a] * p * q).sum::<f64>() * grid.h
}

fn inverse_iterate(op: &FockOp<'_>, sigma: f64, mut y: Vec<f64>) -> Vec<f64> {
    let grid = op.grid;
    let r = grid.r();
    for _ in 0..INVERSE_STEPS {
        let rhs: Vec<f64> = y.iter().enumerate().map(|(a, v)| r[a] * r[a] * v).collect();
        y = op.shifted_solve(sigma, &rhs);
        let n = b_dot(grid, &y, &y).sqrt();
        y.iter_mut().for_each(|v| *v /= n);
    }
    y
}

/// Level `k` by inverse iteration from a warm vector, shifted at its
/// Rayleigh quotient. `None` unless inertia confirms the level index.
fn warm_level(op: &FockOp<'_>, k: usize, warm: &[f64]) -> Option<Vec<f64>> {
    let sigma = op.rayleigh(warm);
    let y = inverse_iterate(op, sigma, warm.to_vec());
    let lambda = op.rayleigh(&y);
    let d = WARM_BRACKET * lambda.abs().max(1e-2);
    (lambda + d < 0.0 && op.count_below(lambda - d) == k && op.count_below(lambda + d) == k + 1).then_some(y)
}

/// Level `k` by inertia bisection followed by inverse iteration.
fn cold_level(op: &FockOp<'_>, k: usize, floor: f64, start: Vec<f64>) -> Vec<f64> {
    let (mut lo, mut hi) = (floor, 0.0f64);
    // the shift only has to be close; inverse iteration does the rest
    while hi - lo > SHIFT_TOL * hi.abs().max(1e-3) {
        let mid = 0.5 * (lo + hi);
        if op.count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    inverse_iterate(op, 0.5 * (lo + hi), start)
}

fn lowest_eigenpairs(
    op: &FockOp<'_>,
    z: f64,
    wanted: usize,
    warm: Option<&[Vec<f64>]>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let grid = op.grid;
    let r = grid.r();
    let mut floor: Option<f64> = None;
    let mut values = Vec::with_capacity(wanted);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(wanted);
    for k in 0..wanted {
        let found = warm.and_then(|w| w.get(k)).and_then(|w| warm_level(op, k, w));
        let mut y = match found {
            Some(y) => y,
            None => {
                let f = match floor {
                    Some(f) => f,
                    None => {
                        let bound = op.count_below(0.0);
                        if bound < wanted {
                            return Err(Error::TooFewBoundLevels { found: bound, wanted });
                        }
                        let mut f = -(z * z).max(1.0);
                        while op.count_below(f) > 0 {
                            f *= 2.0;
                        }
                        floor = Some(f);
                        f
                    }
                };
                let start = match warm.and_then(|w| w.get(k)) {
                    Some(w) => w.clone(),
                    None => (0..grid.m()).map(|a| r[a] * (-r[a]).exp()).collect(),
                };
                cold_level(op, k, f, start)
            }
        };
        for prev in &vectors {
            let p = b_dot(grid, prev, &y);
            y.iter_mut().zip(prev).for_each(|(v, q)| *v -= p * q);
        }
        let n = b_dot(grid, &y, &y).sqrt();
        y.iter_mut().for_each(|v| *v /= n);
        if y[0] < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        values.push(op.rayleigh(&y));
        vectors.push(y);
    }
    Ok((values, vectors))
}

/// Converged radial orbitals on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOrbitalSet {
    pub z: f64,
    pub grid: RadialGrid,
    /// `u_i(r_a)`, one column per orbital; the last row is the `u = 0` node.
    pub u: DMatrix<f64>,
    pub energies: DVector<f64>,
    pub total_energy: f64,
    pub iterations: usize,
}

impl RadialOrbitalSet {
    pub fn n_orbitals(&self) -> usize {
        self.u.ncols()
    }

    fn y(&self, i: usize) -> Vec<f64> {
        let r = self.grid.r();
        (0..self.grid.m()).map(|a| self.u[(a, i)] / r[a].sqrt()).collect()
    }

    /// `∫ u_i u_j dr` on the grid.
    pub fn overlap(&self) -> DMatrix<f64> {
        let n = self.n_orbitals();
        let ys: Vec<Vec<f64>> = (0..n).map(|i| self.y(i)).collect();
        DMatrix::from_fn(n, n, |i, j| b_dot(&self.grid, &ys[i], &ys[j]))
    }

    /// `⟨φ_i, -Δφ_i⟩` per orbital.
    pub fn kinetic_expectations(&self) -> Vec<f64> {
        (0..self.n_orbitals())
            .map(|i| {
                let y = self.y(i);
                let ty = self.grid.kinetic_apply(&y);
                y.iter().zip(&ty).map(|(a, b)| a * b).sum::<f64>() * self.grid.h
            })
            .collect()
    }

    /// `⟨φ_i, -Z/r φ_i⟩` per orbital.
    pub fn nuclear_expectations(&self) -> Vec<f64> {
        let r = self.grid.r();
        (0..self.n_orbitals())
            .map(|i| (0..self.grid.m()).map(|a| -self.z / r[a] * self.u[(a, i)].powi(2) * self.grid.weight(a)).sum())
            .collect()
    }

    /// Largest `|u|` over the outermost 1% of nodes relative to the peak.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.grid.n_points();
        let start = n - (n / 100).max(2);
        (0..self.n_orbitals())
            .map(|i| {
                let col = self.u.column(i);
                let peak = col.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                let tail = col.rows(start, n - start).iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                tail / peak
            })
            .fold(0.0, f64::max)
    }
}

fn total_energy(grid: &RadialGrid, z: f64, ys: &[Vec<f64>]) -> f64 {
    let list: Vec<(f64, &[f64])> = ys.iter().map(|y| (1.0, y.as_slice())).collect();
    let op = FockOp::new(grid, z, &list);
    let bare = FockOp::new(grid, z, &[]);
    ys.iter()
        .map(|y| {
            let core: f64 = y.iter().zip(bare.apply(y)).map(|(a, b)| a * b).sum::<f64>() * grid.h;
            let full: f64 = y.iter().zip(op.apply(y)).map(|(a, b)| a * b).sum::<f64>() * grid.h;
            0.5 * (core + full)
        })
        .sum()
}

pub fn radial_scf(z: u32, n_orbitals: usize, grid: &RadialGrid, options: &RadialOptions) -> Result<RadialOrbitalSet> {
    if n_orbitals == 0 {
        return Err(Error::NoElectrons);
    }
    if z == 0 {
        return Err(Error::InvalidCharge(0));
    }
    if !(0.0..1.0).contains(&options.damping) || options.max_iter == 0 {
        return Err(Error::InvalidOption("radial damping must lie in [0, 1) and max_iter ≥ 1"));
    }
    let zf = z as f64;
    let bare = FockOp::new(grid, zf, &[]);
    let (mut eps, mut ys) = lowest_eigenpairs(&bare, zf, n_orbitals, None)?;
    let mut energy = total_energy(grid, zf, &ys);
    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut converged_at = None;
    for iter in 1..=options.max_iter {
        let mut list: Vec<(f64, &[f64])> = Vec::new();
        match &prev {
            Some(p) if options.damping > 0.0 => {
                list.extend(ys.iter().map(|y| (1.0 - options.damping, y.as_slice())));
                list.extend(p.iter().map(|y| (options.damping, y.as_slice())));
            }
            _ => list.extend(ys.iter().map(|y| (1.0, y.as_slice()))),
        }
        let op = FockOp::new(grid, zf, &list);
        let (new_eps, new_ys) = lowest_eigenpairs(&op, zf, n_orbitals, Some(&ys))?;
        let new_energy = total_energy(grid, zf, &new_ys);
        let de = (new_energy - energy).abs();
        let deps = new_eps.iter().zip(&eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = Some(core::mem::replace(&mut ys, new_ys));
        eps = new_eps;
        energy = new_energy;
        if iter > 1 && de <= options.tol_energy && deps <= options.tol_eigenvalue {
            converged_at = Some(iter);
            break;
        }
    }
    let iterations = converged_at.ok_or(Error::RadialNotConverged(options.max_iter))?;
    // multipliers from the operator of the final orbitals themselves
    let list: Vec<(f64, &[f64])> = ys.iter().map(|y| (1.0, y.as_slice())).collect();
    let op = FockOp::new(grid, zf, &list);
    let energies = DVector::from_iterator(n_orbitals, ys.iter().map(|y| op.rayleigh(y)));
    let n = grid.n_points();
    let r = grid.r();
    let mut u = DMatrix::zeros(n, n_orbitals);
    for (i, y) in ys.iter().enumerate() {
        for a in 0..grid.m() {
            u[(a, i)] = y[a] * r[a].sqrt();
        }
    }
    let set = RadialOrbitalSet { z: zf, grid: grid.clone(), u, energies, total_energy: energy, iterations };
    let amp = set.boundary_amplitude();
    if amp > BOUNDARY_TOL {
        return Err(Error::GridTooSmall(amp));
    }
    Ok(set)
}

#[cfg(test)]
mod tests;
