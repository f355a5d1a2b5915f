//! Tail diagnostics for radial solutions: decay slopes, far-field pair
//! potentials, Laplacian norms and exponentially weighted norms.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use super::RadialOrbitalSet;
use crate::error::{Error, Result};

/// Fewest window points accepted by the slope fit.
const MIN_FIT_POINTS: usize = 10;
/// Smallest amplitude kept in a fit.
const MIN_AMPLITUDE: f64 = 1e-250;

/// Least-squares slope of `ln|φ_i| = ln|u_i / r|` against `r` over
/// `window` (default `[0.6, 0.9]·r_max`), one per orbital. Only nodes past
/// the last sign change of `u_i` enter the fit.
pub fn decay_fit(orbs: &RadialOrbitalSet, window: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let r = orbs.grid.r();
    let (lo, hi) = window.unwrap_or((0.6 * orbs.grid.r_max(), 0.9 * orbs.grid.r_max()));
    if !(lo < hi) || lo < r[0] || hi > orbs.grid.r_max() {
        return Err(Error::BadWindow("window must lie inside the grid"));
    }
    let m = orbs.grid.m();
    let mut out = Vec::with_capacity(orbs.n_orbitals());
    for i in 0..orbs.n_orbitals() {
        let eps = orbs.energies[i];
        if eps < 0.0 && lo <= orbs.z / -eps {
            return Err(Error::BadWindow("window starts inside the classically allowed region"));
        }
        let last_node = (1..m).rev().find(|&a| orbs.u[(a, i)] * orbs.u[(a - 1, i)] < 0.0).unwrap_or(0);
        let pts: Vec<(f64, f64)> = (0..m)
            .filter(|&a| a >= last_node && r[a] >= lo && r[a] <= hi && orbs.u[(a, i)].abs() > MIN_AMPLITUDE)
            .map(|a| (r[a], (orbs.u[(a, i)].abs() / r[a]).ln()))
            .collect();
        if pts.len() < MIN_FIT_POINTS {
            return Err(Error::BadWindow("too few usable points in the window"));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        out.push(sxy / sxx);
    }
    Ok(out)
}

/// `Q_ij(r) = ∫ |x-y|⁻¹ φ_i φ_j dy` at every node (monopole, s orbitals).
pub fn pair_potential(orbs: &RadialOrbitalSet, i: usize, j: usize) -> Vec<f64> {
    let m = orbs.grid.m();
    let v: Vec<f64> = (0..m).map(|a| orbs.u[(a, i)] * orbs.u[(a, j)] * orbs.grid.weight(a)).collect();
    let mut q = orbs.grid.coulomb_apply(&v);
    // outside all charge
    let total: f64 = v.iter().sum();
    q.push(total / orbs.grid.r_max());
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarfieldReport {
    pub r_tail: f64,
    /// `max |r Q_ii(r) - 1|` over `r ≥ r_tail`.
    pub newton_deviation: f64,
    /// `min (2/r + 2√T_i M_j(r/2) - |Q_ij(r)|)` over pairs and tail nodes.
    pub bound_margin: f64,
    /// `max |r Q_ij(r)|` (`i ≠ j`) at the outermost tail node.
    pub offdiag_rq: f64,
    /// `r Q_ii` is non-decreasing on the tail for every orbital.
    pub newton_monotone: bool,
}

/// Orbital mass outside radius `rho`, square-rooted: `M_j(ρ)`.
fn outer_mass(orbs: &RadialOrbitalSet, j: usize, rho: f64) -> f64 {
    let r = orbs.grid.r();
    (0..orbs.grid.m())
        .filter(|&a| r[a] >= rho)
        .map(|a| orbs.u[(a, j)].powi(2) * orbs.grid.weight(a))
        .sum::<f64>()
        .sqrt()
}

/// Far-field checks on `Q_ij`. The bound splits the `y`-integral at `|y| =
/// r/2`: the inner part is at most `2/r`, the outer part at most
/// `‖|x-y|⁻¹φ_i‖·M_j(r/2) ≤ 2‖∇φ_i‖·M_j(r/2)` (Hardy).
pub fn farfield_q_check(orbs: &RadialOrbitalSet, r_tail: f64) -> FarfieldReport {
    let r = orbs.grid.r();
    let n = orbs.n_orbitals();
    let kin = orbs.kinetic_expectations();
    let start = r.iter().position(|&x| x >= r_tail).unwrap_or(r.len() - 1);
    let mut newton_deviation = 0.0f64;
    let mut newton_monotone = true;
    let mut bound_margin = f64::INFINITY;
    let mut offdiag_rq = 0.0f64;
    let masses: Vec<Vec<f64>> =
        (0..n).map(|j| (start..r.len()).map(|a| outer_mass(orbs, j, r[a] / 2.0)).collect()).collect();
    for i in 0..n {
        for j in 0..n {
            let q = pair_potential(orbs, i, j);
            for a in start..r.len() {
                let tail = 2.0 * kin[i].max(0.0).sqrt() * masses[j][a - start];
                bound_margin = bound_margin.min(2.0 / r[a] + tail - q[a].abs());
                if i == j {
                    newton_deviation = newton_deviation.max((r[a] * q[a] - 1.0).abs());
                    if a > start && r[a] * q[a] < r[a - 1] * q[a - 1] - 1e-12 {
                        newton_monotone = false;
                    }
                }
            }
            if i != j {
                let last = r.len() - 1;
                offdiag_rq = offdiag_rq.max((r[last] * q[last]).abs());
            }
        }
    }
    FarfieldReport { r_tail, newton_deviation, bound_margin, offdiag_rq, newton_monotone }
}

/// `‖Δφ_i‖ = (∫ u_i''² dr)^{1/2}` with `u''` from the discrete kinetic
/// operator.
pub fn h2norm_report(orbs: &RadialOrbitalSet) -> Vec<f64> {
    let grid = &orbs.grid;
    let r = grid.r();
    (0..orbs.n_orbitals())
        .map(|i| {
            let y = orbs.y(i);
            let ty = grid.kinetic_apply(&y);
            (0..grid.m())
                .map(|a| {
                    let upp = -ty[a] / r[a].powf(1.5);
                    upp * upp * grid.weight(a)
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    /// `Σ_i ∫ e^{2√ε̃ r} |u_i|² dr`.
    pub value: f64,
    /// Share of `value` from `r ≥ 0.9·r_max`.
    pub tail_fraction: f64,
}

pub fn weighted_tail_norm(orbs: &RadialOrbitalSet, eps_tilde: f64) -> WeightedNorm {
    let grid = &orbs.grid;
    let r = grid.r();
    let rate = 2.0 * eps_tilde.max(0.0).sqrt();
    let m = grid.m();
    let cut = 0.9 * grid.r_max();
    let mut value = 0.0;
    let mut tail = 0.0;
    for a in 0..m {
        let mut s = 0.0;
        for i in 0..orbs.n_orbitals() {
            // combine the exponent before exponentiating to avoid overflow
            let u = orbs.u[(a, i)];
            if u != 0.0 {
                s += (rate * r[a] + 2.0 * u.abs().ln()).exp();
            }
        }
        let c = s * grid.weight(a);
        value += c;
        if r[a] >= cut {
            tail += c;
        }
    }
    WeightedNorm { value, tail_fraction: if value > 0.0 { tail / value } else { 0.0 } }
}

/// `Q_ii(r)` for every orbital, one column each.
pub fn diagonal_q_profile(orbs: &RadialOrbitalSet) -> DMatrix<f64> {
    let n = orbs.grid.n_points();
    let mut out = DMatrix::zeros(n, orbs.n_orbitals());
    for i in 0..orbs.n_orbitals() {
        out.set_column(i, &nalgebra::DVector::from_vec(pair_potential(orbs, i, i)));
    }
    out
}
